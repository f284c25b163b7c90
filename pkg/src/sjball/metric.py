"""Kahler potential, reproducing kernel and the balanced metric.

The metric matrix is ``H[a, b] = d^2 f / du_a dconj(u_b)`` in the ordered
chart of :mod:`sjball.core`. Its blocks are

* ``h1`` (z, z): ``mu conj(M)``
* ``h2`` (z, w) and ``h3 = h2^H`` (w, z)
* ``h4`` (w, w): ``(k/2) h^k + mu h^mu``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    JacobiBallPoint,
    ModelParams,
    _aux_arrays,
    _readonly,
    aux_matrices,
    delta_matrix,
    flatten,
    ordered_pairs,
    pair_factors,
    unflatten,
)
from .errors import NotInBallError, OverflowWarningError, SingularMetricError, StepTooLargeError
from .fd import wirtinger_hessian

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BlockMetric:
    """Metric blocks and the assembled ``(n+m) x (n+m)`` Hermitian matrix."""

    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    h4: np.ndarray
    assembled: np.ndarray

    @property
    def n(self) -> int:
        return self.h1.shape[0]


@dataclass(frozen=True, eq=False)
class BlockMetricInverse:
    """Inverse metric blocks; ``assembled`` satisfies ``H @ assembled = I``."""

    hinv1: np.ndarray
    hinv2: np.ndarray
    hinv3: np.ndarray
    hinv4: np.ndarray
    assembled: np.ndarray


@dataclass(frozen=True)
class MetricDeterminant:
    """Numerical determinant of ``H`` next to its closed form."""

    numeric: float
    closed_form: float

    @property
    def relative_error(self) -> float:
        return abs(self.numeric - self.closed_form) / abs(self.closed_form)


# -- potential and kernel ----------------------------------------------------


def _logdet_N(W: np.ndarray) -> float:
    N = np.eye(W.shape[0]) - W @ W.conj()
    try:
        L = np.linalg.cholesky(0.5 * (N + N.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NotInBallError("I - W conj(W) is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(L.diagonal().real)))


def _quadratic_F(z: np.ndarray, W: np.ndarray) -> complex:
    """``F`` with ``2F = 2 zb^t M z + z^t Wb M z + zb^t M W zb``."""
    n = W.shape[0]
    N = np.eye(n) - W @ W.conj()
    zb = z.conj()
    Mz = np.linalg.solve(N, z)
    MWzb = np.linalg.solve(N, W @ zb)
    twoF = 2.0 * zb @ Mz + z @ (W.conj() @ Mz) + zb @ MWzb
    return 0.5 * twoF


def _potential_raw(k: float, mu: float, z: np.ndarray, W: np.ndarray) -> float:
    F = _quadratic_F(z, W)
    return -0.5 * k * _logdet_N(W) + mu * float(F.real)


def kahler_potential(params: ModelParams, point: JacobiBallPoint) -> float:
    """Kahler potential ``f = -(k/2) log det N + mu F``.

    Examples
    --------
    >>> from sjball.core import validate_ball_point
    >>> pt = JacobiBallPoint([0.0], validate_ball_point([[0.5]]))
    >>> round(kahler_potential(ModelParams(1, 2.0, 1.0), pt), 6)
    0.287682
    """
    F = _quadratic_F(point.z, point.Wm)
    if abs(F.imag) > 1e-10 * max(1.0, abs(F)):
        raise ArithmeticError(f"potential has imaginary part {F.imag:.3e}")
    return -0.5 * params.k * _logdet_N(point.Wm) + params.mu * float(F.real)


def kernel_exponents(params: ModelParams, point: JacobiBallPoint) -> tuple[float, float]:
    """``F`` computed in the ``z`` form and in the ``eta`` form.

    The ``eta`` form is ``2F = 2 etab^t eta - eta^t Wb eta - etab^t W etab``.
    """
    z, W = point.z, point.Wm
    Fz = _quadratic_F(z, W)
    _, _, _, eta = _aux_arrays(z, W)
    eb = eta.conj()
    Feta = 0.5 * (2.0 * eb @ eta - eta @ W.conj() @ eta - eb @ W @ eb)
    return float(Fz.real), float(Feta.real)


def log_kernel(params: ModelParams, point: JacobiBallPoint) -> float:
    """``log K = (k/2) log det M + mu F``; never overflows."""
    Fz, Feta = kernel_exponents(params, point)
    if abs(Fz - Feta) > 1e-10 * max(1.0, abs(Fz)):
        raise ArithmeticError(f"the two forms of F differ by {abs(Fz - Feta):.3e}")
    return -0.5 * params.k * _logdet_N(point.Wm) + params.mu * Fz


def kernel(params: ModelParams, point: JacobiBallPoint) -> float:
    """Reproducing kernel on the diagonal, ``K = det(M)^(k/2) exp(mu F)``.

    Raises
    ------
    OverflowWarningError
        When ``K`` is not representable; :func:`log_kernel` still works.
    """
    lk = log_kernel(params, point)
    if lk > np.log(np.finfo(float).max):
        raise OverflowWarningError(f"log K = {lk:.3g} overflows; use log_kernel")
    return float(np.exp(lk))


# -- metric --------------------------------------------------------------------


def _assemble(h1, h2, h3, h4) -> np.ndarray:
    return np.block([[h1, h2], [h3, h4]])


def _metric_raw(k, mu, z, W, backend=None) -> np.ndarray:
    _, M, _, eta = _aux_arrays(z, W)
    kern = kernels.get_backend(backend)
    h = _assemble(*kern.metric_blocks(M, eta, k, mu, ordered_pairs(W.shape[0])))
    return 0.5 * (h + h.conj().T)


def metric_matrix(params: ModelParams, point: JacobiBallPoint, backend: str | None = None) -> BlockMetric:
    """Closed-form balanced metric.

    Parameters
    ----------
    params : ModelParams
    point : JacobiBallPoint
    backend : {"numba", "numpy"}, optional
        Kernel back end; defaults to the ``SJB_NUMBA`` choice.
    """
    aux = aux_matrices(params, point)
    kern = kernels.get_backend(backend)
    h1, h2, h3, h4 = kern.metric_blocks(aux.M, aux.eta, params.k, params.mu, ordered_pairs(params.n))
    H = _assemble(h1, h2, h3, h4)
    if np.max(np.abs(H - H.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(H))):
        raise ArithmeticError("assembled metric is not Hermitian")
    H = 0.5 * (H + H.conj().T)
    n = params.n
    return BlockMetric(
        h1=_readonly(H[:n, :n]),
        h2=_readonly(H[:n, n:]),
        h3=_readonly(H[n:, :n]),
        h4=_readonly(H[n:, n:]),
        assembled=_readonly(H),
    )


def hk_block(W: np.ndarray) -> np.ndarray:
    """``h^k[a, b] = 2 f_a f_b (M_np M_mq + M_mp M_nq)`` for ``a = (p,q)``, ``b = (m,n)``.

    The Siegel-ball block normalised so that ``h4 = (k/2) h^k + mu h^mu``.
    """
    W = np.asarray(W, dtype=complex)
    n = W.shape[0]
    M = np.linalg.inv(np.eye(n) - W @ W.conj())
    P = ordered_pairs(n)
    f = pair_factors(n)
    p, q = P[:, 0], P[:, 1]
    # rows a = (p, q), columns b = (r, s)
    r, s = p[None, :], q[None, :]
    p, q = p[:, None], q[:, None]
    out = M[s, p] * M[r, q] + M[r, p] * M[s, q]
    return 2.0 * np.outer(f, f) * out


def _potential_on_flat(params: ModelParams, n: int):
    def fun(u):
        z, W = unflatten(u, n)
        try:
            return _potential_raw(params.k, params.mu, z, W)
        except NotInBallError as exc:
            raise StepTooLargeError("finite-difference stencil leaves the ball") from exc

    return fun


def fd_metric_oracle(params: ModelParams, point: JacobiBallPoint, step: float = 1e-4) -> np.ndarray:
    """Metric from central second differences of the Kahler potential.

    Each ordered coordinate ``u_a`` is perturbed along its real and
    imaginary directions and the mixed Wirtinger Hessian is assembled from
    the real Hessian.

    Raises
    ------
    StepTooLargeError
        If a perturbed point is outside the ball.
    """
    H = wirtinger_hessian(_potential_on_flat(params, params.n), point.to_flat(), step)
    return 0.5 * (H + H.conj().T)


def relative_entry_error(reference: np.ndarray, other: np.ndarray) -> float:
    """``max |A - B|_ab / sqrt(|A_aa A_bb|)``.

    Scale-aware entrywise error for positive definite Hermitian ``A``: the
    diagonal bounds every entry through Cauchy-Schwarz.
    """
    d = np.sqrt(np.abs(np.real(np.diag(reference))))
    return float(np.max(np.abs(reference - other) / np.outer(d, d)))


def metric_inverse(params: ModelParams, point: JacobiBallPoint) -> BlockMetricInverse:
    """Closed-form inverse of the metric.

    With ``Nb = conj(N)``, ``S = eta^t Nb`` and ``alpha = S conj(eta)``::

        hinv1 = Nb / mu + (alpha Nb + conj(S) S^t) / k
        hinv2[i, (m,n)] = -(S_n Nb_im + S_m Nb_in) / k
        hinv3 = hinv2^H
        hinv4[(p,q), (m,n)] = (Nb_qn Nb_pm + Nb_pn Nb_qm) / k
    """
    if params.mu == 0:
        raise SingularMetricError("metric is degenerate for mu = 0")
    aux = aux_matrices(params, point)
    k, mu = params.k, params.mu
    Nb = aux.N.conj()
    S = aux.S
    P = ordered_pairs(params.n)
    p, q = P[:, 0], P[:, 1]
    h1 = Nb / mu + (aux.alpha * Nb + np.outer(S.conj(), S)) / k
    h2 = -(S[q][None, :] * Nb[:, p] + S[p][None, :] * Nb[:, q]) / k
    h3 = h2.conj().T
    h4 = (Nb[np.ix_(q, q)] * Nb[np.ix_(p, p)] + Nb[np.ix_(p, q)] * Nb[np.ix_(q, p)]) / k
    return BlockMetricInverse(
        hinv1=_readonly(h1),
        hinv2=_readonly(h2),
        hinv3=_readonly(h3),
        hinv4=_readonly(h4),
        assembled=_readonly(_assemble(h1, h2, h3, h4)),
    )


def inverse_contract_deviation(params: ModelParams, point: JacobiBallPoint) -> float:
    """``max |H Hinv - diag(I, Delta)|`` over the ordered chart."""
    H = metric_matrix(params, point).assembled
    Hi = metric_inverse(params, point).assembled
    n = params.n
    target = np.zeros_like(H)
    target[:n, :n] = np.eye(n)
    target[n:, n:] = delta_matrix(n)
    return float(np.max(np.abs(H @ Hi - target)))


def hk_inverse_contract(params: ModelParams, point: JacobiBallPoint) -> float:
    """Contract ``h^k`` with ``k_{mn, uv} = (N_vn Nb_mu + N_vm Nb_nu) / 2``.

    Returns the max deviation of ``sum_{m<=n} h^k_{pq,mn} k_{mn,uv}`` from
    ``Delta^{uv}_{pq}``.
    """
    W = point.Wm
    n = W.shape[0]
    N = np.eye(n) - W @ W.conj()
    Nb = N.conj()
    P = ordered_pairs(n)
    m_, n_ = P[:, 0], P[:, 1]
    u_, v_ = P[:, 0], P[:, 1]
    # rows (m,n), columns (u,v)
    K = 0.5 * (N[np.ix_(v_, n_)].T * Nb[np.ix_(m_, u_)] + N[np.ix_(v_, m_)].T * Nb[np.ix_(n_, u_)])
    prod = hk_block(W) @ K
    return float(np.max(np.abs(prod - delta_matrix(n))))


def log_det_metric(params: ModelParams, W: np.ndarray) -> float:
    """Closed-form ``log det H``; it does not depend on ``z``.

    ``det H = 2^(n(n-1)/2) (k/2)^(n(n+1)/2) mu^n det(N)^-(n+2)`` in the
    ordered chart. The power of two comes from each off-diagonal ``w_pq``
    standing for both ``W_pq`` and ``W_qp``.
    """
    if params.mu == 0:
        raise SingularMetricError("metric is degenerate for mu = 0")
    n = params.n
    return (
        0.5 * n * (n - 1) * np.log(2.0)
        + 0.5 * n * (n + 1) * np.log(0.5 * params.k)
        + n * np.log(params.mu)
        - (n + 2) * _logdet_N(np.asarray(W, dtype=complex))
    )


def metric_determinant(params: ModelParams, point: JacobiBallPoint) -> MetricDeterminant:
    """LU determinant of the assembled metric and its closed form."""
    H = metric_matrix(params, point).assembled
    sign, logabs = np.linalg.slogdet(H)
    numeric = float((sign * np.exp(logabs)).real)
    return MetricDeterminant(numeric=numeric, closed_form=float(np.exp(log_det_metric(params, point.Wm))))


def squared_speed(params: ModelParams, point: JacobiBallPoint, v) -> float:
    """Real squared length ``2 sum_ab h_{a conj(b)} v_a conj(v_b)`` of a tangent vector."""
    H = metric_matrix(params, point).assembled
    v = np.asarray(v, dtype=complex)
    return float(2.0 * np.real(v @ H @ v.conj()))


def _speed_raw(k, mu, z, W, vz, vW) -> float:
    H = _metric_raw(k, mu, z, W)
    v = flatten(vz, vW)
    return float(2.0 * np.real(v @ H @ v.conj()))
