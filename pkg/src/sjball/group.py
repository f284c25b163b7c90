"""Jacobi group elements, their action on the ball and invariance checks.

A symplectic element is the pair ``(p, q)`` standing for the block matrix
``[[p, q], [conj(q), conj(p)]]``. A Jacobi group element adds a Heisenberg
translation ``alpha`` and a real center ``t`` (which does not act on points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import (
    JacobiBallPoint,
    ModelParams,
    _readonly,
    _rng,
    flatten,
    ordered_pairs,
    random_symmetric,
    unflatten,
    validate_ball_point,
)
from .errors import InvalidElementError, NotInBallError, SingularError, StepTooLargeError
from .fd import real_jacobian, wirtinger_gradient
from .metric import _metric_raw, hk_block

GROUP_TOL = 1e-10


def symplectic_defect(p: np.ndarray, q: np.ndarray) -> float:
    """Largest violation of the four symplectic identities."""
    I = np.eye(p.shape[0])
    ph, qh = p.conj().T, q.conj().T
    checks = (
        p @ ph - q @ qh - I,
        p @ q.T - q @ p.T,
        ph @ p - q.T @ q.conj() - I,
        p.T @ q.conj() - qh @ p,
    )
    return float(max(np.max(np.abs(c)) for c in checks))


@dataclass(frozen=True, eq=False)
class SymplecticElement:
    """``(p, q)`` with ``p p^* - q q^* = I`` and ``p q^t = q p^t``."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.p, dtype=complex))
        q = np.atleast_2d(np.asarray(self.q, dtype=complex))
        if p.shape != q.shape or p.shape[0] != p.shape[1]:
            raise InvalidElementError("p and q must be square of equal size")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise InvalidElementError("non-finite entries")
        scale = max(1.0, float(np.max(np.abs(p))) ** 2, float(np.max(np.abs(q))) ** 2)
        d = symplectic_defect(p, q)
        if d > GROUP_TOL * scale:
            raise InvalidElementError(f"symplectic constraints violated by {d:.3e}")
        object.__setattr__(self, "p", _readonly(p))
        object.__setattr__(self, "q", _readonly(q))

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def times(self, alpha) -> np.ndarray:
        """``g x alpha = p alpha + q conj(alpha)``."""
        alpha = np.asarray(alpha, dtype=complex)
        return self.p @ alpha + self.q @ alpha.conj()

    def inv_times(self, alpha) -> np.ndarray:
        """``g^{-1} x alpha = p^* alpha - q^t conj(alpha)``."""
        alpha = np.asarray(alpha, dtype=complex)
        return self.p.conj().T @ alpha - self.q.T @ alpha.conj()

    def __matmul__(self, other: "SymplecticElement") -> "SymplecticElement":
        p1, q1, p2, q2 = self.p, self.q, other.p, other.q
        return SymplecticElement(p1 @ p2 + q1 @ q2.conj(), p1 @ q2 + q1 @ p2.conj())

    def inverse(self) -> "SymplecticElement":
        return SymplecticElement(self.p.conj().T, -self.q.T)

    def as_matrix(self) -> np.ndarray:
        return np.block([[self.p, self.q], [self.q.conj(), self.p.conj()]])


@dataclass(frozen=True, eq=False)
class JacobiGroupElement:
    """``(g, alpha, t)``."""

    g: SymplecticElement
    alpha: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=complex))
        if alpha.shape != (self.g.n,):
            raise InvalidElementError("alpha has the wrong length")
        if not (np.all(np.isfinite(alpha)) and np.isfinite(self.t)):
            raise InvalidElementError("non-finite entries")
        object.__setattr__(self, "alpha", _readonly(alpha))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.g.n


def identity(n: int) -> JacobiGroupElement:
    return JacobiGroupElement(SymplecticElement(np.eye(n), np.zeros((n, n))), np.zeros(n), 0.0)


def compose(e1: JacobiGroupElement, e2: JacobiGroupElement) -> JacobiGroupElement:
    """Group law ``(g1 g2, g2^{-1} x a1 + a2, t1 + t2 + Im((g2^{-1} x a1)^t conj(a2)))``."""
    if e1.n != e2.n:
        raise InvalidElementError("dimension mismatch")
    b = e2.g.inv_times(e1.alpha)
    t = e1.t + e2.t + float(np.imag(b @ e2.alpha.conj()))
    return JacobiGroupElement(e1.g @ e2.g, b + e2.alpha, t)


def inverse(e: JacobiGroupElement) -> JacobiGroupElement:
    """``(g^{-1}, -g x alpha, -t)``."""
    return JacobiGroupElement(e.g.inverse(), -e.g.times(e.alpha), -e.t)


def element_distance(e1: JacobiGroupElement, e2: JacobiGroupElement) -> float:
    """Max-norm distance between components."""
    return float(
        max(
            np.max(np.abs(e1.g.p - e2.g.p)),
            np.max(np.abs(e1.g.q - e2.g.q)),
            np.max(np.abs(e1.alpha - e2.alpha)),
            abs(e1.t - e2.t),
        )
    )


def _act_raw(e: JacobiGroupElement, z, W, form: int = 0):
    p, q = e.g.p, e.g.q
    try:
        if form == 0:
            W1 = np.linalg.solve((q.conj() @ W + p.conj()).T, (p @ W + q).T).T
        else:
            W1 = np.linalg.solve(W @ q.conj().T + p.conj().T, q.T + W @ p.T)
        z1 = np.linalg.solve(W @ q.conj().T + p.conj().T, z + e.alpha - W @ e.alpha.conj())
    except np.linalg.LinAlgError as exc:
        raise SingularError("singular denominator in the group action") from exc
    return z1, W1


def act(e: JacobiGroupElement, point: JacobiBallPoint) -> JacobiBallPoint:
    """Action on the Siegel-Jacobi ball.

    ``W1 = (p W + q)(conj(q) W + conj(p))^{-1}`` and
    ``z1 = (W q^* + p^*)^{-1} (z + alpha - W conj(alpha))``.
    """
    z1, W1 = _act_raw(e, point.z, point.Wm)
    return JacobiBallPoint(z1, validate_ball_point(0.5 * (W1 + W1.T)))


def act_forms_deviation(e: JacobiGroupElement, point: JacobiBallPoint) -> float:
    """Difference between the two expressions for ``W1``."""
    _, A = _act_raw(e, point.z, point.Wm, 0)
    _, B = _act_raw(e, point.z, point.Wm, 1)
    return float(np.max(np.abs(A - B)))


def fc_transform(eta, W) -> JacobiBallPoint:
    """``(eta, W) -> (z, W)`` with ``z = eta - W conj(eta)``."""
    W = validate_ball_point(W)
    eta = np.atleast_1d(np.asarray(eta, dtype=complex))
    return JacobiBallPoint(eta - W.W @ eta.conj(), W)


def fc_inverse(point: JacobiBallPoint) -> tuple[np.ndarray, np.ndarray]:
    """``eta = M (z + W conj(z))``, returned with ``W``."""
    W = point.Wm
    N = np.eye(point.n) - W @ W.conj()
    return np.linalg.solve(N, point.z + W @ point.z.conj()), np.array(W)


def act_on_eta(e: JacobiGroupElement, eta, W) -> tuple[np.ndarray, np.ndarray]:
    """Action in ``(eta, W)`` coordinates: ``eta1 = p (eta + alpha) + q conj(eta + alpha)``."""
    eta = np.atleast_1d(np.asarray(eta, dtype=complex))
    W = validate_ball_point(W).W
    s = eta + e.alpha
    eta1 = e.g.p @ s + e.g.q @ s.conj()
    _, W1 = _act_raw(e, np.zeros_like(eta), W)
    return eta1, 0.5 * (W1 + W1.T)


# -- random elements ---------------------------------------------------------------


def random_symplectic(seed=None, n: int = 2, scale: float = 0.5) -> SymplecticElement:
    """Exponential of a random element of the Lie algebra.

    The algebra element is ``[[a, b], [conj(b), conj(a)]]`` with ``a``
    anti-Hermitian and ``b`` symmetric, each scaled by ``scale``.
    """
    rng = _rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = 0.5 * scale * (A - A.conj().T)
    b = scale * random_symmetric(n, rng)
    G = expm(np.block([[a, b], [b.conj(), a.conj()]]))
    p, q = G[:n, :n], G[:n, n:]
    return SymplecticElement(p, q)


def random_element(seed=None, n: int = 2, scale: float = 0.5) -> JacobiGroupElement:
    rng = _rng(seed)
    g = random_symplectic(rng, n, scale)
    alpha = scale * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return JacobiGroupElement(g, alpha, float(rng.normal()))


# -- invariance checks ------------------------------------------------------------


def action_jacobian(e: JacobiGroupElement, point: JacobiBallPoint, step: float = 1e-5) -> np.ndarray:
    """Holomorphic Jacobian of the action in the ordered chart, by finite differences."""
    n = point.n

    def fmap(u):
        z, W = unflatten(u, n)
        z1, W1 = _act_raw(e, z, W)
        return flatten(z1, W1)

    return wirtinger_gradient(fmap, point.to_flat(), step)


def _speed(H, v):
    return float(2.0 * np.real(v @ H @ v.conj()))


def metric_invariance_check(
    params: ModelParams, e: JacobiGroupElement, point: JacobiBallPoint, samples: int = 5, seed=0, step: float = 1e-5
) -> float:
    """Max relative change of the squared speed under the action.

    Compares ``|v|^2`` at ``point`` with ``|J v|^2`` at ``act(e, point)`` for
    random tangent vectors ``v``.
    """
    rng = _rng(seed)
    J = action_jacobian(e, point, step)
    image = act(e, point)
    H0 = _metric_raw(params.k, params.mu, point.z, point.Wm)
    H1 = _metric_raw(params.k, params.mu, image.z, image.Wm)
    worst = 0.0
    for _ in range(samples):
        v = rng.normal(size=J.shape[1]) + 1j * rng.normal(size=J.shape[1])
        s0 = _speed(H0, v)
        s1 = _speed(H1, J @ v)
        worst = max(worst, abs(s1 - s0) / s0)
    return worst


@dataclass(frozen=True)
class FCSplitReport:
    """Pull-back of the metric and Kahler form through the FC map.

    All entries are max-norm deviations divided by ``max(1, max|G|)``.

    Attributes
    ----------
    cross_metric, cross_form : float
        Size of the ``(eta, W)`` cross blocks.
    w_block_metric, w_block_form : float
        ``W`` block minus the Siegel-ball metric of weight ``k/2``.
    eta_block_form : float
        ``eta`` block of the two-form minus the flat form of weight ``mu``.
    eta_block_metric : float
        ``eta`` block of the metric minus the flat metric. The map is not
        holomorphic, so this is not expected to vanish.
    """

    cross_metric: float
    cross_form: float
    w_block_metric: float
    w_block_form: float
    eta_block_form: float
    eta_block_metric: float

    @property
    def max_cross(self) -> float:
        return max(self.cross_metric, self.cross_form)


def _real_pullback(H, J):
    """Metric ``2 Re(J^t H conj(J))`` and form ``-2 Im(J^t H conj(J))``."""
    C = J.T @ H @ J.conj()
    return 2.0 * C.real, -2.0 * C.imag


def fc_block_split_check(params: ModelParams, eta, W, step: float = 1e-5) -> FCSplitReport:
    """Check how the FC map splits the geometry into flat and Siegel parts.

    Real coordinates are ``(Re eta, Im eta, Re w, Im w)`` over ordered
    pairs; the Jacobian of ``(eta, W) -> (z, W)`` is taken by central
    differences.
    """
    n = params.n
    m = n * (n + 1) // 2
    eta = np.atleast_1d(np.asarray(eta, dtype=complex))
    W = validate_ball_point(W).W
    P = ordered_pairs(n)
    w = W[P[:, 0], P[:, 1]]
    r0 = np.concatenate([eta.real, eta.imag, w.real, w.imag])

    def fmap(r):
        e = r[:n] + 1j * r[n : 2 * n]
        _, Wr = unflatten(np.concatenate([np.zeros(n), r[2 * n : 2 * n + m] + 1j * r[2 * n + m :]]), n)
        u = flatten(e - Wr @ e.conj(), Wr)
        return np.concatenate([u.real, u.imag])

    try:
        Jr = real_jacobian(fmap, r0, step)
    except NotInBallError as exc:  # pragma: no cover - map is polynomial
        raise StepTooLargeError(str(exc)) from exc
    D = n + m
    J = Jr[:D] + 1j * Jr[D:]
    z = eta - W @ eta.conj()
    G, Om = _real_pullback(_metric_raw(params.k, params.mu, z, W), J)

    ie = np.r_[0 : 2 * n]
    iw = np.r_[2 * n : 2 * n + 2 * m]
    Je = np.hstack([np.eye(n), 1j * np.eye(n)])
    Jw = np.hstack([np.eye(m), 1j * np.eye(m)])
    Ge, Oe = _real_pullback(params.mu * np.eye(n), Je)
    Gw, Ow = _real_pullback(0.5 * params.k * hk_block(W), Jw)
    scale = max(1.0, float(np.max(np.abs(G))))

    def dev(A):
        return float(np.max(np.abs(A))) / scale

    return FCSplitReport(
        cross_metric=dev(G[np.ix_(ie, iw)]),
        cross_form=dev(Om[np.ix_(ie, iw)]),
        w_block_metric=dev(G[np.ix_(iw, iw)] - Gw),
        w_block_form=dev(Om[np.ix_(iw, iw)] - Ow),
        eta_block_form=dev(Om[np.ix_(ie, ie)] - Oe),
        eta_block_metric=dev(G[np.ix_(ie, ie)] - Ge),
    )
