"""Finite-difference helpers used by the numerical oracles.

Holomorphic coordinates ``u`` are split as ``x = Re u`` and ``y = Im u``;
Wirtinger derivatives are ``d/du = (d/dx - i d/dy) / 2`` and
``d/dconj(u) = (d/dx + i d/dy) / 2``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


def real_hessian(fun: Callable[[np.ndarray], float], x: np.ndarray, step: float) -> np.ndarray:
    """Central-difference Hessian of a real scalar function.

    Diagonal entries use the three-point stencil, off-diagonal entries the
    four-point mixed stencil; both are second order in ``step``.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    f0 = fun(x)
    H = np.empty((d, d))
    e = np.eye(d) * step
    fp = np.array([fun(x + e[r]) for r in range(d)])
    fm = np.array([fun(x - e[r]) for r in range(d)])
    for r in range(d):
        H[r, r] = (fp[r] - 2.0 * f0 + fm[r]) / step**2
        for s in range(r + 1, d):
            v = (
                fun(x + e[r] + e[s])
                - fun(x + e[r] - e[s])
                - fun(x - e[r] + e[s])
                + fun(x - e[r] - e[s])
            ) / (4.0 * step**2)
            H[r, s] = H[s, r] = v
    return H


def wirtinger_hessian(fun: Callable[[np.ndarray], float], u: np.ndarray, step: float) -> np.ndarray:
    """Mixed Wirtinger Hessian ``H[a, b] = d^2 f / du_a dconj(u_b)``.

    Parameters
    ----------
    fun : callable
        Real function of a complex vector.
    u : ndarray
        Complex base point of length ``D``.
    step : float
        Step for both the real and imaginary directions.
    """
    u = np.asarray(u, dtype=complex)
    D = u.size

    def g(r):
        return fun(r[:D] + 1j * r[D:])

    R = real_hessian(g, np.concatenate([u.real, u.imag]), step)
    fxx, fyy = R[:D, :D], R[D:, D:]
    fxy, fyx = R[:D, D:], R[D:, :D]
    return 0.25 * ((fxx + fyy) + 1j * (fxy - fyx))


def wirtinger_gradient(
    fun: Callable[[np.ndarray], np.ndarray], u: np.ndarray, step: float, conjugate: bool = False
) -> np.ndarray:
    """Wirtinger derivatives of an array-valued function.

    Returns an array of shape ``fun(u).shape + (D,)`` holding ``d fun / du_a``
    (or ``d fun / dconj(u_a)`` when ``conjugate`` is true).
    """
    u = np.asarray(u, dtype=complex)
    out = []
    sign = 1.0 if conjugate else -1.0
    for a in range(u.size):
        e = np.zeros(u.size, dtype=complex)
        e[a] = step
        dx = (np.asarray(fun(u + e)) - np.asarray(fun(u - e))) / (2 * step)
        dy = (np.asarray(fun(u + 1j * e)) - np.asarray(fun(u - 1j * e))) / (2 * step)
        out.append(0.5 * (dx + sign * 1j * dy))
    return np.stack(out, axis=-1)


def real_jacobian(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float) -> np.ndarray:
    """Central-difference Jacobian ``J[i, r] = d fun_i / d x_r``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for r in range(x.size):
        e = np.zeros(x.size)
        e[r] = step
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * step))
    return np.stack(cols, axis=-1)


@lru_cache(maxsize=None)
def central_weights(deriv: int, npoints: int) -> np.ndarray:
    """Weights of the centered ``npoints`` stencil for the ``deriv``-th derivative.

    Solves the Vandermonde system on offsets ``-h..h`` in units of the step.
    """
    if npoints % 2 == 0 or npoints <= deriv:
        raise ValueError("npoints must be odd and larger than deriv")
    h = npoints // 2
    offs = np.arange(-h, h + 1, dtype=float)
    A = np.vander(offs, increasing=True).T
    b = np.zeros(npoints)
    b[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    w = np.linalg.solve(A, b)
    w.setflags(write=False)
    return w


def sampled_derivative(samples: np.ndarray, dt: float, deriv: int, npoints: int = 5) -> np.ndarray:
    """Derivative of uniformly sampled data along axis 0.

    Only interior samples get a value: the result has
    ``len(samples) - (npoints - 1)`` rows, aligned with
    ``samples[npoints // 2 : -(npoints // 2)]``.
    """
    samples = np.asarray(samples)
    w = central_weights(deriv, npoints)
    h = npoints // 2
    L = samples.shape[0]
    if L < npoints:
        raise ValueError("not enough samples")
    out = sum(w[j] * samples[j : L - npoints + 1 + j] for j in range(npoints))
    return out / dt**deriv


def richardson(estimate: Callable[[float], np.ndarray], step: float, order: int = 2) -> np.ndarray:
    """One Richardson extrapolation step for an ``O(step**order)`` estimate."""
    a = np.asarray(estimate(step))
    b = np.asarray(estimate(step / 2))
    c = 2.0**order
    return (c * b - a) / (c - 1.0)
