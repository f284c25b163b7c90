"""Closed forms on the Siegel-Jacobi disk (n = 1), written in the disk's own
weight ``k1`` and converted with ``2 k1 = k / 2``, so ``lambda = mu / (2 k1)``
becomes ``2 mu / k``.

All quantities use ``P = 1 - |w|^2`` and ``eta = (z + zb w) / P``.
"""

import numpy as np


def _disk(z, w):
    P = 1.0 - abs(w) ** 2
    eta = (z + np.conj(z) * w) / P
    return P, eta


def k1(k):
    return k / 4.0


def lam(k, mu):
    return mu / (2.0 * k1(k))


def metric(k, mu, z, w):
    P, eta = _disk(z, w)
    return np.array(
        [[mu / P, mu * eta / P], [mu * np.conj(eta) / P, 2 * k1(k) / P**2 + mu * abs(eta) ** 2 / P]]
    )


def inverse(k, mu, z, w):
    P, eta = _disk(z, w)
    c = 2 * k1(k)
    return np.array(
        [[P / mu + P**2 * abs(eta) ** 2 / c, -(P**2) * eta / c], [-(P**2) * np.conj(eta) / c, P**2 / c]]
    )


def determinant(k, mu, w):
    return 2 * k1(k) * mu / (1 - abs(w) ** 2) ** 3


def christoffel(k, mu, z, w):
    """``G[c, a, b]`` with index 0 for ``z`` and 1 for ``w``."""
    P, eta = _disk(z, w)
    e, wb, L = np.conj(eta), np.conj(w), lam(k, mu)
    G = np.zeros((2, 2, 2), complex)
    G[0, 0, 0] = -L * e
    G[1, 0, 0] = L
    G[0, 0, 1] = G[0, 1, 0] = -L * e**2 + wb / P
    G[1, 0, 1] = G[1, 1, 0] = L * e
    G[0, 1, 1] = -L * e**3
    G[1, 1, 1] = L * e**2 + 2 * wb / P
    return G


def geodesic_acceleration(k, mu, z, w, vz, vw):
    """``(z'', w'')`` from the two disk equations."""
    P, eta = _disk(z, w)
    wb = np.conj(w)
    G1 = vz + np.conj(eta) * vw
    c = 2 * k1(k)
    az = mu * np.conj(eta) * G1**2 / c - 2 * wb / P * vz * vw
    aw = -mu * G1**2 / c - 2 * wb / P * vw**2
    return az, aw


def connection(k, mu, z, w):
    """``theta[a, b, c]``: coefficient of ``du_c`` in ``theta^a_b``."""
    P, eta = _disk(z, w)
    e, wb, L = np.conj(eta), np.conj(w), lam(k, mu)
    A = np.array([1.0, e])  # A = dz + conj(eta) dw
    dz, dw = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    th = np.zeros((2, 2, 2), complex)
    th[0, 0] = -L * e * A + wb / P * dw
    th[0, 1] = -L * e**2 * A + wb / P * dz
    th[1, 0] = L * A
    th[1, 1] = L * e * A + 2 * wb / P * dw
    return th


def covariant_dz(k, mu, z, w):
    """Both displayed matrices of ``D(dz)``: in ``(dz, dw)`` and in ``(A, dw)``, the latter pulled back."""
    P, eta = _disk(z, w)
    e, wb, L = np.conj(eta), np.conj(w), lam(k, mu)
    first = np.array([[L * e, L * e**2 - wb / P], [L * e**2 - wb / P, L * e**3]])
    T = np.array([[1.0, e], [0.0, 1.0]])  # (A, dw) = T (dz, dw)
    second = T.T @ np.array([[L * e, -wb / P], [-wb / P, 2 * e * wb / P]]) @ T
    return first, second


def covariant_dw(k, mu, z, w):
    """Both displayed matrices of ``-D(dw)``."""
    P, eta = _disk(z, w)
    e, wb, L = np.conj(eta), np.conj(w), lam(k, mu)
    first = np.array([[L, L * e], [L * e, L * e**2 + 2 * wb / P]])
    T = np.array([[1.0, e], [0.0, 1.0]])
    second = T.T @ np.diag([L, 2 * wb / P]) @ T
    return first, second
