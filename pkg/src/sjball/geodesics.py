"""Geodesic equations, integrators and closed-form solutions.

The complex system for ``(z, W)`` closes on itself: the holomorphic
Christoffel symbols are the only nonzero ones, and the conjugate equations
are the complex conjugates. With ``X = conj(W) M``, ``eta = M (z + W conj(z))``
and ``Y = z' + W' conj(eta)``::

    z'' = -2 W' X z' + 2 eps (conj(eta)^t Y) Y
    W'' = -2 W' X W' - 2 eps Y Y^t
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import (
    BALL_TOL,
    SYMMETRY_TOL,
    JacobiBallPoint,
    ModelParams,
    _readonly,
    ball_margin,
    flatten,
    unflatten,
    validate_ball_point,
)
from .errors import InvalidStateError, NotInBallError, NotSymmetricError, StepFailure
from .fd import sampled_derivative
from .metric import _speed_raw


@dataclass(frozen=True, eq=False)
class GeodesicState:
    """Position ``(z, W)`` and velocity ``(vz, vW)``."""

    z: np.ndarray
    W: np.ndarray
    vz: np.ndarray
    vW: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        W = np.atleast_2d(np.asarray(self.W, dtype=complex))
        vz = np.atleast_1d(np.asarray(self.vz, dtype=complex))
        vW = np.atleast_2d(np.asarray(self.vW, dtype=complex))
        n = z.shape[0]
        if W.shape != (n, n) or vz.shape != (n,) or vW.shape != (n, n):
            raise InvalidStateError("inconsistent shapes in geodesic state")
        for a in (z, W, vz, vW):
            if not np.all(np.isfinite(a)):
                raise InvalidStateError("non-finite geodesic state")
        scale = max(1.0, float(np.max(np.abs(vW))))
        if np.max(np.abs(vW - vW.T)) > SYMMETRY_TOL * scale:
            raise InvalidStateError("vW is not symmetric")
        try:
            W = validate_ball_point(W).W
        except (NotSymmetricError, NotInBallError) as exc:
            raise InvalidStateError(str(exc)) from exc
        object.__setattr__(self, "z", _readonly(z))
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "vz", _readonly(vz))
        object.__setattr__(self, "vW", _readonly(0.5 * (vW + vW.T)))

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def point(self) -> JacobiBallPoint:
        return JacobiBallPoint(self.z, validate_ball_point(self.W))

    @property
    def velocity_flat(self) -> np.ndarray:
        return flatten(self.vz, self.vW)

    @classmethod
    def from_flat(cls, u, v, n: int) -> "GeodesicState":
        z, W = unflatten(np.asarray(u, dtype=complex), n)
        vz, vW = unflatten(np.asarray(v, dtype=complex), n)
        return cls(z, W, vz, vW)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled geodesic.

    Attributes
    ----------
    times : ndarray
        Strictly increasing sample times.
    states : tuple of GeodesicState
    speeds : ndarray
        Squared speed at every sample.
    residuals : ndarray
        Geodesic-equation defect at every sample, using accelerations
        differentiated from the sampled velocities.
    status : str
        ``"ok"`` or ``"left_ball"`` (trajectory truncated at the last
        sample inside the ball).
    """

    times: np.ndarray
    states: tuple
    speeds: np.ndarray
    residuals: np.ndarray
    status: str = "ok"
    message: str = field(default="")

    @property
    def speed_drift(self) -> float:
        """``max |speed - speed[0]| / max(1, |speed[0]|)``."""
        s0 = self.speeds[0]
        return float(np.max(np.abs(self.speeds - s0)) / max(1.0, abs(s0)))

    def positions_flat(self) -> np.ndarray:
        return np.array([flatten(s.z, s.W) for s in self.states])

    def velocities_flat(self) -> np.ndarray:
        return np.array([s.velocity_flat for s in self.states])


# -- right-hand side ---------------------------------------------------------------


def _aux_X_eta(z, W):
    n = W.shape[0]
    N = np.eye(n) - W @ W.conj()
    M = np.linalg.inv(N)
    eta = np.linalg.solve(N, z + W @ z.conj())
    return W.conj() @ M, eta


def _rhs_raw(eps, z, W, vz, vW):
    X, eta = _aux_X_eta(z, W)
    Y = vz + vW @ eta.conj()
    az = -2.0 * vW @ X @ vz + 2.0 * eps * (eta.conj() @ Y) * Y
    aW = -2.0 * vW @ X @ vW - 2.0 * eps * np.outer(Y, Y)
    return az, 0.5 * (aW + aW.T)


def geodesic_rhs(params: ModelParams, state: GeodesicState) -> tuple[np.ndarray, np.ndarray]:
    """Accelerations ``(z'', W'')`` of the geodesic through ``state``."""
    if state.n != params.n:
        raise InvalidStateError("state dimension does not match params")
    return _rhs_raw(params.epsilon, state.z, state.W, state.vz, state.vW)


def christoffel_acceleration(params: ModelParams, state: GeodesicState) -> tuple[np.ndarray, np.ndarray]:
    """``-Gamma^c_{ab} v_a v_b`` unpacked into ``(z'', W'')``."""
    from .connection import christoffel

    G = christoffel(params, state.point)
    a = -G.contract(state.velocity_flat)
    return unflatten(a, params.n)


def _residual_raw(k, mu, z, W, vz, vW, az, aW) -> float:
    X, eta = _aux_X_eta(z, W)
    Y = vz + vW @ eta.conj()
    G1 = (eta.conj() @ Y) * Y
    G3 = az + 2.0 * vW @ X @ vz
    G2 = aW + 2.0 * vW @ X @ vW
    G4 = np.outer(Y, Y)
    r1 = np.max(np.abs(k * G3 - 2.0 * mu * G1))
    r2 = np.max(np.abs(k * G2 + 2.0 * mu * G4))
    return float(max(r1, r2))


def geodesic_residual(params: ModelParams, state: GeodesicState, accel) -> float:
    """``max(|k G3 - 2 mu G1|, |k G2 + 2 mu G4|)`` for candidate accelerations.

    ``G3 = z'' + 2 W' X z'``, ``G1 = (conj(eta)^t Y) Y``,
    ``G2 = W'' + 2 W' X W'`` and ``G4 = Y Y^t``.
    """
    az, aW = accel
    return _residual_raw(
        params.k, params.mu, state.z, state.W, state.vz, state.vW,
        np.asarray(az, dtype=complex), np.asarray(aW, dtype=complex),
    )


# -- integration -----------------------------------------------------------------------


def _pack(z, W, vz, vW):
    return np.concatenate([z, W.ravel(), vz, vW.ravel()])


def _unpack(y, n):
    nn = n * n
    z = y[:n]
    W = y[n : n + nn].reshape(n, n)
    vz = y[n + nn : 2 * n + nn]
    vW = y[2 * n + nn :].reshape(n, n)
    return z, W, vz, vW


def _system(eps, n):
    def f(t, y):
        z, W, vz, vW = _unpack(y, n)
        az, aW = _rhs_raw(eps, z, W, vz, vW)
        return _pack(vz, vW, az, aW)

    return f


def _finish(params, times, ys, status, message):
    n, k, mu = params.n, params.k, params.mu
    times = np.asarray(times, dtype=float)
    ys = np.asarray(ys)
    parts = [_unpack(y, n) for y in ys]
    states = tuple(GeodesicState(z, 0.5 * (W + W.T), vz, vW) for z, W, vz, vW in parts)
    speeds = np.array([_speed_raw(k, mu, s.z, s.W, s.vz, s.vW) for s in states])
    if len(times) >= 3:
        V = np.array([np.concatenate([s.vz, s.vW.ravel()]) for s in states])
        A = np.gradient(V, times, axis=0, edge_order=2)
        residuals = np.array(
            [
                _residual_raw(k, mu, s.z, s.W, s.vz, s.vW, a[:n], a[n:].reshape(n, n))
                for s, a in zip(states, A)
            ]
        )
    else:
        residuals = np.zeros(len(times))
    return Trajectory(times, states, speeds, residuals, status, message)


def integrate_geodesic(
    params: ModelParams,
    initial: GeodesicState,
    t_end: float,
    steps: int | None = None,
    rel_tol: float | None = None,
    ball_tol: float = BALL_TOL,
) -> Trajectory:
    """Integrate the geodesic equations from ``initial`` over ``[0, t_end]``.

    Parameters
    ----------
    params : ModelParams
    initial : GeodesicState
    t_end : float
        Final time, positive.
    steps : int, optional
        Number of classical RK4 steps. Default 1000 unless ``rel_tol`` is
        given.
    rel_tol : float, optional
        Use adaptive RK45 with this relative tolerance instead.
    ball_tol : float
        The run stops, with ``status="left_ball"``, once the smallest
        eigenvalue of ``I - W conj(W)`` drops to this value.

    Returns
    -------
    Trajectory

    Raises
    ------
    StepFailure
        If the adaptive integrator cannot meet its tolerance.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if steps is not None and rel_tol is not None:
        raise ValueError("give either steps or rel_tol, not both")
    n = params.n
    f = _system(params.epsilon, n)
    y0 = _pack(initial.z, initial.W, initial.vz, initial.vW)

    if rel_tol is None:
        steps = 1000 if steps is None else int(steps)
        if steps < 1:
            raise ValueError("steps must be positive")
        h = t_end / steps
        times, ys = [0.0], [y0]
        y = y0
        status, message = "ok", ""
        for i in range(steps):
            t = i * h
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            W = _unpack(y, n)[1]
            if not np.all(np.isfinite(y)) or ball_margin(0.5 * (W + W.T)) <= ball_tol:
                status = "left_ball"
                message = f"trajectory left the ball near t = {t + h:.6g}"
                break
            times.append((i + 1) * h)
            ys.append(y)
        return _finish(params, times, ys, status, message)

    def exit_event(t, y):
        W = _unpack(y, n)[1]
        return ball_margin(0.5 * (W + W.T)) - ball_tol

    exit_event.terminal = True
    exit_event.direction = -1
    sol = solve_ivp(f, (0.0, t_end), y0, method="RK45", rtol=rel_tol, atol=rel_tol * 1e-3, events=exit_event)
    if sol.status == -1:
        raise StepFailure(sol.message)
    ys = sol.y.T
    times = sol.t
    status, message = "ok", ""
    if sol.status == 1:
        status = "left_ball"
        message = f"trajectory left the ball near t = {sol.t_events[0][0]:.6g}"
        # drop samples that overshoot the boundary
        keep = [i for i, y in enumerate(ys) if exit_event(0, y) > 0]
        ys, times = ys[keep], times[keep]
    return _finish(params, times, ys, status, message)


# -- closed forms --------------------------------------------------------------------------

_SERIES_CUTOFF = 1e-12


def _check_symmetric(B) -> np.ndarray:
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if B.shape[0] != B.shape[1]:
        raise NotSymmetricError("B must be square")
    scale = max(1.0, float(np.max(np.abs(B))) if B.size else 1.0)
    if np.max(np.abs(B - B.T)) > SYMMETRY_TOL * 10 * scale:
        raise NotSymmetricError("B must be symmetric")
    return 0.5 * (B + B.T)


def _phi_jet(lam: np.ndarray, t: float):
    """``tanh(t s)/s`` and its first two t-derivatives, ``s = sqrt(lam)``."""
    lam = np.clip(lam, 0.0, None)
    s = np.sqrt(lam)
    ts = t * s
    th = np.tanh(ts)
    e2 = np.exp(-2.0 * np.abs(ts))
    sech2 = 4.0 * e2 / (1.0 + e2) ** 2
    small = lam < _SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(small, t - t**3 * lam / 3 + 2 * t**5 * lam**2 / 15, th / np.where(small, 1.0, s))
    dphi = sech2
    ddphi = -2.0 * s * th * sech2
    return phi, dphi, ddphi


def _matrix_jet(A: np.ndarray, t: float):
    """``phi_t(A)`` and t-derivatives for Hermitian positive semidefinite ``A``."""
    A = 0.5 * (A + A.conj().T)
    lam, V = np.linalg.eigh(A)
    phi, dphi, ddphi = _phi_jet(lam, t)
    Vh = V.conj().T
    return (V * phi) @ Vh, (V * dphi) @ Vh, (V * ddphi) @ Vh


def siegel_geodesic_jet(B, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``W(t) = B tanh(t sqrt(conj(B) B)) / sqrt(conj(B) B)`` with ``W'`` and ``W''``."""
    B = _check_symmetric(B)
    F0, F1, F2 = _matrix_jet(B.conj() @ B, t)
    out = []
    for F in (F0, F1, F2):
        W = B @ F
        out.append(0.5 * (W + W.T))
    return tuple(out)


def siegel_geodesic_closed_form(B, t):
    """Siegel-ball geodesic with ``W(0) = 0`` and ``W'(0) = B``.

    Parameters
    ----------
    B : array_like
        Symmetric initial velocity.
    t : float or array_like
        Time or times.

    Returns
    -------
    ndarray
        ``W(t)``; stacked along the first axis when ``t`` is an array.

    Examples
    --------
    >>> float(siegel_geodesic_closed_form([[0.5]], 2.0)[0, 0].real) == float(np.tanh(1.0))
    True
    """
    if np.ndim(t) == 0:
        return siegel_geodesic_jet(B, float(t))[0]
    return np.array([siegel_geodesic_jet(B, float(s))[0] for s in np.asarray(t)])


def mu_zero_jet(B, vz0, z0, t: float):
    """Decoupled geodesic (``mu = 0``) with ``W(0) = 0``, ``W'(0) = B``.

    ``z(t) = phi_t(B conj(B)) z'(0) + z(0)``, which equals
    ``W(t) B^{-1} z'(0) + z(0)`` when ``B`` is invertible but needs no
    inverse.

    Returns
    -------
    state : GeodesicState
    accel : tuple of ndarray
        ``(z'', W'')``.
    """
    B = _check_symmetric(B)
    vz0 = np.atleast_1d(np.asarray(vz0, dtype=complex))
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    F0, F1, F2 = _matrix_jet(B @ B.conj(), t)
    W, vW, aW = siegel_geodesic_jet(B, t)
    state = GeodesicState(F0 @ vz0 + z0, W, F1 @ vz0, vW)
    return state, (F2 @ vz0, aW)


def mu_zero_z_solution(B, vz0, z0, t):
    """Vector part ``z(t)`` of the decoupled geodesic; see :func:`mu_zero_jet`."""
    if np.ndim(t) == 0:
        return mu_zero_jet(B, vz0, z0, float(t))[0].z
    return np.array([mu_zero_jet(B, vz0, z0, float(s))[0].z for s in np.asarray(t)])


def fc_particular_jet(eta0, B, t: float):
    """Particular geodesic ``z = eta0 - W(t) conj(eta0)`` with its acceleration.

    Along it ``eta`` stays equal to ``eta0`` and ``Y = 0``, so it solves the
    full coupled system for every ``mu``.
    """
    eta0 = np.atleast_1d(np.asarray(eta0, dtype=complex))
    W, vW, aW = siegel_geodesic_jet(B, t)
    eb = eta0.conj()
    state = GeodesicState(eta0 - W @ eb, W, -vW @ eb, vW)
    return state, (-aW @ eb, aW)


def fc_particular_geodesic(eta0, B, t: float) -> GeodesicState:
    """State at time ``t`` of the particular geodesic; see :func:`fc_particular_jet`."""
    return fc_particular_jet(eta0, B, float(t))[0]


def fd_residuals(params: ModelParams, times, zs, Ws, npoints: int = 9) -> np.ndarray:
    """Geodesic residual with velocities and accelerations from a centered stencil.

    ``times`` must be uniform. Values are returned for the interior samples
    only (``len(times) - npoints + 1`` of them).
    """
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0])
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
        raise ValueError("times must be uniformly spaced")
    zs = np.asarray(zs, dtype=complex)
    Ws = np.asarray(Ws, dtype=complex)
    h = npoints // 2
    vz = sampled_derivative(zs, dt, 1, npoints)
    az = sampled_derivative(zs, dt, 2, npoints)
    vW = sampled_derivative(Ws, dt, 1, npoints)
    aW = sampled_derivative(Ws, dt, 2, npoints)
    zc, Wc = zs[h : len(zs) - h], Ws[h : len(Ws) - h]
    return np.array(
        [
            _residual_raw(params.k, params.mu, zc[i], Wc[i], vz[i], vW[i], az[i], aW[i])
            for i in range(len(zc))
        ]
    )


def siegel_fd_residual(B, times, npoints: int = 9) -> float:
    """Max of ``|W'' + 2 W' X W'|`` along the closed form with finite-difference derivatives."""
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0])
    Ws = siegel_geodesic_closed_form(B, times)
    vW = sampled_derivative(Ws, dt, 1, npoints)
    aW = sampled_derivative(Ws, dt, 2, npoints)
    h = npoints // 2
    out = 0.0
    for i, W in enumerate(Ws[h : len(Ws) - h]):
        X = W.conj() @ np.linalg.inv(np.eye(W.shape[0]) - W @ W.conj())
        out = max(out, float(np.max(np.abs(aW[i] + 2.0 * vW[i] @ X @ vW[i]))))
    return out
