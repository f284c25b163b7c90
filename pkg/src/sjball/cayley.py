"""Siegel upper half-plane and its Cayley bridge to the Siegel ball.

Points are symmetric ``V = S + i R`` with ``R`` positive definite. The
Cayley map is ``V = i (I - W)^{-1} (I + W)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import SYMMETRY_TOL, _readonly, _rng, flatten, unflatten, validate_ball_point
from .errors import (
    InsufficientSamplesError,
    NotInHalfPlaneError,
    NotSymmetricError,
    SingularError,
)
from .fd import sampled_derivative, wirtinger_gradient


@dataclass(frozen=True, eq=False)
class HalfPlanePoint:
    """Symmetric ``V`` with ``Im V`` positive definite."""

    V: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=complex))
        if V.shape[0] != V.shape[1]:
            raise ValueError("V must be square")
        scale = max(1.0, float(np.max(np.abs(V))))
        if np.max(np.abs(V - V.T)) > 1e3 * SYMMETRY_TOL * scale:
            raise NotSymmetricError("V must be symmetric")
        V = 0.5 * (V + V.T)
        if np.linalg.eigvalsh(V.imag)[0] <= 0:
            raise NotInHalfPlaneError("Im V is not positive definite")
        object.__setattr__(self, "V", _readonly(V))

    @property
    def R(self) -> np.ndarray:
        return self.V.imag

    @property
    def S(self) -> np.ndarray:
        return self.V.real


def cayley(W) -> HalfPlanePoint:
    """Cayley transform of a ball point.

    Examples
    --------
    >>> complex(cayley([[0.5]]).V[0, 0])
    3j
    """
    W = validate_ball_point(W).W
    I = np.eye(W.shape[0])
    try:
        V = 1j * np.linalg.solve(I - W, I + W)
    except np.linalg.LinAlgError as exc:
        raise SingularError("I - W is singular") from exc
    return HalfPlanePoint(V)


def cayley_inverse(V) -> np.ndarray:
    """``W = (V - i I)(V + i I)^{-1}``; the factors commute."""
    V = V.V if isinstance(V, HalfPlanePoint) else HalfPlanePoint(V).V
    I = np.eye(V.shape[0])
    W = np.linalg.solve(V + 1j * I, V - 1j * I)
    return 0.5 * (W + W.T)


def halfplane_metric(V, dV) -> float:
    """``tr(R^{-1} dV R^{-1} conj(dV))``."""
    V = V.V if isinstance(V, HalfPlanePoint) else HalfPlanePoint(V).V
    dV = np.atleast_2d(np.asarray(dV, dtype=complex))
    Ri = np.linalg.inv(V.imag)
    return float(np.real(np.trace(Ri @ dV @ Ri @ dV.conj())))


def ball_metric(W, dW) -> float:
    """``4 tr(M dW conj(M) conj(dW))``: the Siegel-ball metric matching :func:`halfplane_metric`."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    dW = np.atleast_2d(np.asarray(dW, dtype=complex))
    M = np.linalg.inv(np.eye(W.shape[0]) - W @ W.conj())
    return float(4.0 * np.real(np.trace(M @ dW @ M.conj() @ dW.conj())))


def cayley_differential(W, dW) -> np.ndarray:
    """``dV = 2 i U dW U`` with ``U = (I - W)^{-1}``."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    U = np.linalg.inv(np.eye(W.shape[0]) - W)
    return 2j * U @ np.asarray(dW, dtype=complex) @ U


def cayley_second_differential(W, dW, ddW) -> np.ndarray:
    """``V'' = 2 i U (W'' + 2 W' U W') U``."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    U = np.linalg.inv(np.eye(W.shape[0]) - W)
    return 2j * U @ (ddW + 2.0 * dW @ U @ dW) @ U


def metric_transfer_deviation(W, dW) -> float:
    """Relative gap between the half-plane metric of ``dV`` and the ball metric of ``dW``."""
    V = cayley(W)
    a = halfplane_metric(V, cayley_differential(W, dW))
    b = ball_metric(W, dW)
    return abs(a - b) / max(abs(b), 1e-300)


# -- real symplectic action ----------------------------------------------------------


def random_real_symplectic(seed=None, n: int = 2, scale: float = 0.5) -> np.ndarray:
    """``expm(J S)`` for random real symmetric ``S``; returns the ``2n x 2n`` matrix."""
    rng = _rng(seed)
    A = rng.normal(size=(2 * n, 2 * n))
    S = 0.5 * scale * (A + A.T)
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return expm(J @ S)


def split_blocks(g: np.ndarray):
    n = g.shape[0] // 2
    return g[:n, :n], g[:n, n:], g[n:, :n], g[n:, n:]


def sp_action_halfplane(a, b, c, d, V, form: int = 0) -> np.ndarray:
    """``V1 = (a V + b)(c V + d)^{-1}``, or the equivalent ``(V c^t + d^t)^{-1}(V a^t + b^t)``."""
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    try:
        if form == 0:
            V1 = np.linalg.solve((c @ V + d).T, (a @ V + b).T).T
        else:
            V1 = np.linalg.solve(V @ c.T + d.T, V @ a.T + b.T)
    except np.linalg.LinAlgError as exc:
        raise SingularError("singular denominator") from exc
    return V1


def halfplane_invariance_check(g: np.ndarray, V, samples: int = 5, seed=0, step: float = 1e-5) -> float:
    """Max relative change of the half-plane metric under ``g``, with an FD Jacobian."""
    a, b, c, d = split_blocks(g)
    V = HalfPlanePoint(V).V
    n = V.shape[0]
    rng = _rng(seed)

    def fmap(u):
        _, Vu = unflatten(np.concatenate([np.zeros(n), u]), n)
        return flatten(np.zeros(n), sp_action_halfplane(a, b, c, d, Vu))[n:]

    u0 = flatten(np.zeros(n), V)[n:]
    J = wirtinger_gradient(fmap, u0, step)
    V1 = sp_action_halfplane(a, b, c, d, V)
    worst = 0.0
    for _ in range(samples):
        v = rng.normal(size=u0.size) + 1j * rng.normal(size=u0.size)
        dV = unflatten(np.concatenate([np.zeros(n), v]), n)[1]
        dV1 = unflatten(np.concatenate([np.zeros(n), J @ v]), n)[1]
        s0 = halfplane_metric(V, dV)
        s1 = halfplane_metric(V1, dV1)
        worst = max(worst, abs(s1 - s0) / s0)
    return worst


# -- geodesics ---------------------------------------------------------------------------


def halfplane_geodesic_residual(V_samples, dt: float, npoints: int = 9) -> float:
    """Max of ``|V'' + i V' R^{-1} V'|`` with finite-difference derivatives.

    Parameters
    ----------
    V_samples : array_like
        Shape ``(T, n, n)``, uniformly spaced by ``dt``.
    npoints : int
        Odd stencil width.
    """
    Vs = np.asarray(V_samples, dtype=complex)
    if Vs.ndim == 1:
        Vs = Vs[:, None, None]
    if Vs.shape[0] < npoints:
        raise InsufficientSamplesError(f"need at least {npoints} samples, got {Vs.shape[0]}")
    h = npoints // 2
    dV = sampled_derivative(Vs, dt, 1, npoints)
    ddV = sampled_derivative(Vs, dt, 2, npoints)
    out = 0.0
    for i, V in enumerate(Vs[h : Vs.shape[0] - h]):
        Ri = np.linalg.inv(V.imag)
        out = max(out, float(np.max(np.abs(ddV[i] + 1j * dV[i] @ Ri @ dV[i]))))
    return out


def transferred_geodesic_residual(W, dW, ddW) -> float:
    """Half-plane geodesic defect of the Cayley image, using the exact chain rule."""
    V = cayley(W).V
    dV = cayley_differential(W, dW)
    ddV = cayley_second_differential(W, dW, ddW)
    return float(np.max(np.abs(ddV + 1j * dV @ np.linalg.inv(V.imag) @ dV)))


# -- identities --------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaReport:
    """Deviations of the ``Sigma = X`` identity and the two factorizations of ``R``."""

    sigma_vs_X: float
    R_factorization_1: float
    R_factorization_2: float

    @property
    def max_deviation(self) -> float:
        return max(self.sigma_vs_X, self.R_factorization_1, self.R_factorization_2)


def sigma_identity_check(W) -> SigmaReport:
    """Check ``Sigma = X`` and the two factorizations of ``R``.

    ``Sigma = tau U`` with ``tau = I - U R^{-1}`` and ``U = (I - W)^{-1}``;
    ``R`` is taken from ``2R = (I + W) U + (I + conj(W)) conj(U)``.
    """
    W = validate_ball_point(W).W
    I = np.eye(W.shape[0])
    Wb = W.conj()
    U = np.linalg.inv(I - W)
    R = 0.5 * ((I + W) @ U + (I + Wb) @ U.conj())
    tau = I - U @ np.linalg.inv(R)
    Sigma = tau @ U
    X = Wb @ np.linalg.inv(I - W @ Wb)
    R1 = U.conj() @ (I - Wb @ W) @ U
    R2 = U @ (I - W @ Wb) @ U.conj()
    scale = max(1.0, float(np.max(np.abs(R))))
    return SigmaReport(
        sigma_vs_X=float(np.max(np.abs(Sigma - X))) / max(1.0, float(np.max(np.abs(X)))),
        R_factorization_1=float(np.max(np.abs(R1 - R))) / scale,
        R_factorization_2=float(np.max(np.abs(R2 - R))) / scale,
    )
