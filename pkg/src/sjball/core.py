"""Parameters, points, the coordinate chart and the auxiliary matrices.

Coordinates on the Siegel-Jacobi ball are flattened as
``(z_1, ..., z_n, w_11, w_12, ..., w_1n, w_22, ..., w_nn)``: the vector
part first, then the upper triangle of ``W`` in row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    NonFiniteError,
    NotInBallError,
    NotSymmetricError,
    OutOfRangeError,
    SingularError,
)

SYMMETRY_TOL = 1e-12
BALL_TOL = 1e-10
ALPHA_IMAG_TOL = 1e-10


def _readonly(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Dimension ``n`` and the two metric weights.

    ``k`` weighs the Siegel-ball part and ``mu`` the Heisenberg part. The
    value ``mu = 0`` is admitted as the decoupled limit; the metric is then
    degenerate and operations that invert it raise.
    """

    n: int
    k: float
    mu: float

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValueError(f"k must be positive, got {self.k!r}")
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"mu must be non-negative, got {self.mu!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def epsilon(self) -> float:
        return self.mu / self.k

    @property
    def dim(self) -> int:
        return self.n * (self.n + 3) // 2


def _check_finite(a: np.ndarray, what: str):
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{what} has non-finite entries")


def ball_margin(W: np.ndarray) -> float:
    """Smallest eigenvalue of ``I - W conj(W)`` (positive inside the ball)."""
    N = np.eye(W.shape[0]) - W @ W.conj()
    return float(np.linalg.eigvalsh(0.5 * (N + N.conj().T))[0])


@dataclass(frozen=True, eq=False)
class SiegelBallPoint:
    """Symmetric ``W`` with ``I - W conj(W)`` positive definite.

    Construct through :func:`validate_ball_point`; direct construction runs
    the same checks with default tolerances.
    """

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=complex)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"W must be square, got shape {W.shape}")
        _check_finite(W, "W")
        _validate_symmetric_in_ball(W, BALL_TOL, SYMMETRY_TOL)
        object.__setattr__(self, "W", _readonly(0.5 * (W + W.T)))

    @property
    def n(self) -> int:
        return self.W.shape[0]


def _validate_symmetric_in_ball(W, tol, sym_tol):
    scale = max(1.0, float(np.max(np.abs(W))) if W.size else 1.0)
    asym = float(np.max(np.abs(W - W.T))) if W.size else 0.0
    if asym >= sym_tol * scale:
        raise NotSymmetricError(f"asymmetry {asym:.3e} exceeds tolerance")
    Ws = 0.5 * (W + W.T)
    lam = ball_margin(Ws)
    if not lam > tol:
        raise NotInBallError(f"min eigenvalue of I - W conj(W) is {lam:.3e}")


def validate_ball_point(W, tol: float = BALL_TOL, sym_tol: float = SYMMETRY_TOL) -> SiegelBallPoint:
    """Validate and symmetrize a Siegel-ball matrix.

    Parameters
    ----------
    W : array_like
        Complex ``n x n`` matrix.
    tol : float
        Required margin for the smallest eigenvalue of ``I - W conj(W)``.
    sym_tol : float
        Relative tolerance on ``max |W - W^t|``.

    Returns
    -------
    SiegelBallPoint

    Raises
    ------
    NonFiniteError, NotSymmetricError, NotInBallError
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim == 0:
        W = W.reshape(1, 1)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"W must be square, got shape {W.shape}")
    _check_finite(W, "W")
    _validate_symmetric_in_ball(W, tol, sym_tol)
    pt = object.__new__(SiegelBallPoint)
    object.__setattr__(pt, "W", _readonly(0.5 * (W + W.T)))
    return pt


@dataclass(frozen=True, eq=False)
class JacobiBallPoint:
    """A point ``(z, W)`` of the Siegel-Jacobi ball."""

    z: np.ndarray
    W: SiegelBallPoint

    def __post_init__(self):
        W = self.W if isinstance(self.W, SiegelBallPoint) else validate_ball_point(self.W)
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.shape != (W.n,):
            raise ValueError(f"z must have shape ({W.n},), got {z.shape}")
        _check_finite(z, "z")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "z", _readonly(z))

    @property
    def n(self) -> int:
        return self.W.n

    @property
    def Wm(self) -> np.ndarray:
        """The matrix ``W`` itself."""
        return self.W.W

    def to_flat(self) -> np.ndarray:
        """Holomorphic coordinates in the ordered chart."""
        return flatten(self.z, self.W.W)

    @classmethod
    def from_flat(cls, u, n: int | None = None) -> "JacobiBallPoint":
        u = np.asarray(u, dtype=complex)
        if n is None:
            n = dim_to_n(u.shape[0])
        z, W = unflatten(u, n)
        return cls(z, validate_ball_point(W))

    @classmethod
    def origin(cls, n: int) -> "JacobiBallPoint":
        return cls(np.zeros(n), validate_ball_point(np.zeros((n, n))))


def dim_to_n(dim: int) -> int:
    n = int(round((-3 + np.sqrt(9 + 8 * dim)) / 2))
    if n < 1 or n * (n + 3) // 2 != dim:
        raise ValueError(f"{dim} is not of the form n(n+3)/2")
    return n


@lru_cache(maxsize=None)
def _pairs(n: int) -> np.ndarray:
    p, q = np.triu_indices(n)
    arr = np.stack([p, q], axis=1).astype(np.int64)
    arr.setflags(write=False)
    return arr


def ordered_pairs(n: int) -> np.ndarray:
    """``(m, 2)`` array of 0-based ordered pairs ``p <= q``."""
    return _pairs(n)


@lru_cache(maxsize=None)
def _pair_factors(n: int) -> np.ndarray:
    P = _pairs(n)
    f = np.where(P[:, 0] == P[:, 1], 0.5, 1.0)
    f.setflags(write=False)
    return f


def pair_factors(n: int) -> np.ndarray:
    """``f_pq = 1 - delta_pq / 2`` over the ordered pairs."""
    return _pair_factors(n)


@lru_cache(maxsize=None)
def _pair_tensor(n: int) -> np.ndarray:
    from .kernels.vectorized import pair_tensor

    T = pair_tensor(_pairs(n), n)
    T.setflags(write=False)
    return T


def pair_tensor(n: int) -> np.ndarray:
    """``T[a, i, j] = (d_pi d_qj + d_pj d_qi) f_pq`` for ``a = (p, q)``."""
    return _pair_tensor(n)


def flatten(z, W) -> np.ndarray:
    """Pack ``(z, W)`` into the ordered chart."""
    W = np.asarray(W, dtype=complex)
    P = _pairs(W.shape[0])
    return np.concatenate([np.asarray(z, dtype=complex).ravel(), W[P[:, 0], P[:, 1]]])


def unflatten(u, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`flatten`; ``W`` is rebuilt exactly symmetric."""
    u = np.asarray(u)
    P = _pairs(n)
    W = np.zeros((n, n), dtype=np.result_type(u.dtype, complex))
    W[P[:, 0], P[:, 1]] = u[n:]
    W[P[:, 1], P[:, 0]] = u[n:]
    return u[:n].astype(W.dtype), W


def sym_from_pairs(v, n: int) -> np.ndarray:
    """Symmetric matrix whose ordered-pair entries are ``v``."""
    return unflatten(np.concatenate([np.zeros(n, dtype=complex), np.asarray(v, dtype=complex)]), n)[1]


class CoordinateIndexMap:
    """Bijection between flat indices and labels ``z<i>`` / ``w<p><q>``.

    Labels are 1-based. For ``n > 9`` the two indices of a pair are
    separated by a comma, as in ``"w3,12"``.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.total_dim = n * (n + 3) // 2
        self.pairs = tuple((int(p), int(q)) for p, q in _pairs(n))
        self._labels = [f"z{i + 1}" for i in range(n)] + [self._wlabel(p, q) for p, q in self.pairs]
        self._index = {lab: i for i, lab in enumerate(self._labels)}
        self._pair_index = {pq: n + a for a, pq in enumerate(self.pairs)}

    def _wlabel(self, p, q):
        sep = "," if self.n > 9 else ""
        return f"w{p + 1}{sep}{q + 1}"

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    def label_of(self, index: int) -> str:
        if not 0 <= index < self.total_dim:
            raise OutOfRangeError(f"index {index} outside 0..{self.total_dim - 1}")
        return self._labels[index]

    def w_index(self, p: int, q: int) -> int:
        """Flat index of ``w_pq`` (1-based ``p, q``, any order)."""
        if not (1 <= p <= self.n and 1 <= q <= self.n):
            raise OutOfRangeError(f"pair ({p}, {q}) outside 1..{self.n}")
        p, q = min(p, q), max(p, q)
        return self._pair_index[(p - 1, q - 1)]

    def z_index(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise OutOfRangeError(f"z index {i} outside 1..{self.n}")
        return i - 1

    def flat_index(self, label: str) -> int:
        if label in self._index:
            return self._index[label]
        body = label[1:]
        try:
            if label.startswith("z"):
                return self.z_index(int(body))
            if label.startswith("w"):
                if "," in body:
                    p, q = body.split(",")
                elif self.n <= 9 and len(body) == 2:
                    p, q = body[0], body[1]
                else:
                    raise ValueError
                return self.w_index(int(p), int(q))
        except ValueError:
            pass
        raise OutOfRangeError(f"unknown coordinate label {label!r}")


@lru_cache(maxsize=None)
def index_map(n: int) -> CoordinateIndexMap:
    return CoordinateIndexMap(n)


def delta_tensor(i: int, j: int, p: int, q: int) -> float:
    """``(d_ip d_jq + d_iq d_jp) f_ij`` with ``f_ij = 1 - d_ij / 2``."""
    d = lambda a, b: 1.0 if a == b else 0.0  # noqa: E731
    f = 0.5 if i == j else 1.0
    return (d(i, p) * d(j, q) + d(i, q) * d(j, p)) * f


def delta_matrix(n: int) -> np.ndarray:
    """``[Delta^{mn}_{pq}]`` over ordered pairs (rows ``pq``, columns ``mn``)."""
    P = [(p + 1, q + 1) for p, q in _pairs(n)]
    return np.array([[delta_tensor(m, nn, p, q) for (m, nn) in P] for (p, q) in P])


@dataclass(frozen=True, eq=False)
class AuxMatrices:
    """Matrices derived from a point that every formula consumes.

    Attributes
    ----------
    N : ndarray
        ``I - W conj(W)``, Hermitian positive definite.
    M : ndarray
        ``N^{-1}``.
    X : ndarray
        ``conj(W) M``, symmetric.
    eta : ndarray
        ``M (z + W conj(z))``.
    S : ndarray
        ``eta^t conj(N)``.
    alpha : float
        ``eta^t conj(N) conj(eta)``, real and non-negative.
    epsilon : float
        ``mu / k``.
    """

    N: np.ndarray
    M: np.ndarray
    X: np.ndarray
    eta: np.ndarray
    S: np.ndarray
    alpha: float
    epsilon: float


def _aux_arrays(z, W):
    n = W.shape[0]
    Wb = W.conj()
    N = np.eye(n) - W @ Wb
    N = 0.5 * (N + N.conj().T)
    try:
        M = np.linalg.inv(N)
        eta = np.linalg.solve(N, z + W @ z.conj())
    except np.linalg.LinAlgError as exc:
        raise SingularError("I - W conj(W) is singular") from exc
    M = 0.5 * (M + M.conj().T)
    X = Wb @ M
    X = 0.5 * (X + X.T)
    return N, M, X, eta


def aux_matrices(params: ModelParams, point: JacobiBallPoint) -> AuxMatrices:
    """Auxiliary matrices at ``point``.

    Examples
    --------
    >>> p = ModelParams(1, 2.0, 1.0)
    >>> a = aux_matrices(p, JacobiBallPoint([1.0], validate_ball_point([[0.5]])))
    >>> float(a.eta[0].real), float(a.S[0].real), a.alpha
    (2.0, 1.5, 3.0)
    """
    N, M, X, eta = _aux_arrays(point.z, point.Wm)
    Nb = N.conj()
    S = eta @ Nb
    alpha_c = eta @ Nb @ eta.conj()
    if abs(alpha_c.imag) > ALPHA_IMAG_TOL * max(1.0, abs(alpha_c)):
        raise ArithmeticError(f"alpha has imaginary part {alpha_c.imag:.3e}")
    return AuxMatrices(
        N=_readonly(N),
        M=_readonly(M),
        X=_readonly(X),
        eta=_readonly(eta),
        S=_readonly(S),
        alpha=float(alpha_c.real),
        epsilon=params.epsilon,
    )


# -- random sampling ---------------------------------------------------------


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_symmetric(n: int, rng=None, scale: float = 1.0) -> np.ndarray:
    """Complex symmetric matrix with Gaussian entries."""
    rng = _rng(rng)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (A + A.T)


def random_ball_matrix(n: int, rng=None, radius: float = 0.8) -> np.ndarray:
    """Symmetric ``W`` with operator norm uniform in ``[0.05, radius]``."""
    rng = _rng(rng)
    A = random_symmetric(n, rng)
    norm = np.linalg.norm(A, 2)
    return A * (rng.uniform(0.05, radius) / norm)


def random_point(n: int, rng=None, radius: float = 0.8, z_scale: float = 1.0) -> JacobiBallPoint:
    """Random valid point; ``z`` is complex Gaussian times ``z_scale``."""
    rng = _rng(rng)
    W = random_ball_matrix(n, rng, radius)
    z = z_scale * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return JacobiBallPoint(z, validate_ball_point(W))
