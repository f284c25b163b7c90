"""Explicit index loops over ordered pairs, compiled with numba."""

import numpy as np
from numba import njit


@njit(cache=True)
def _d(a, b):
    return 1.0 if a == b else 0.0


@njit(cache=True)
def _f(p, q):
    return 0.5 if p == q else 1.0


@njit(cache=True)
def _metric_blocks(M, eta, k, mu, pairs):
    n = M.shape[0]
    m = pairs.shape[0]
    Mb = np.conj(M)
    h1 = mu * Mb
    h2 = np.zeros((n, m), dtype=np.complex128)
    h3 = np.zeros((m, n), dtype=np.complex128)
    h4 = np.zeros((m, m), dtype=np.complex128)
    for a in range(m):
        p = pairs[a, 0]
        q = pairs[a, 1]
        fa = _f(p, q)
        for i in range(n):
            h2[i, a] = mu * fa * (Mb[i, p] * eta[q] + Mb[i, q] * eta[p])
            h3[a, i] = mu * fa * (np.conj(eta[q]) * Mb[p, i] + np.conj(eta[p]) * Mb[q, i])
        for b in range(m):
            r = pairs[b, 0]
            s = pairs[b, 1]
            ff = fa * _f(r, s)
            hmu = np.conj(eta[q]) * (Mb[p, r] * eta[s] + Mb[p, s] * eta[r]) + np.conj(
                eta[p]
            ) * (Mb[q, r] * eta[s] + Mb[q, s] * eta[r])
            hk = 2.0 * (M[s, p] * M[r, q] + M[r, p] * M[s, q])
            h4[a, b] = ff * (mu * hmu + 0.5 * k * hk)
    return h1, h2, h3, h4


def metric_blocks(M, eta, k, mu, pairs):
    """Blocks ``(h1, h2, h3, h4)`` of the metric in the ordered chart."""
    return _metric_blocks(
        np.ascontiguousarray(M, dtype=np.complex128),
        np.ascontiguousarray(eta, dtype=np.complex128),
        float(k),
        float(mu),
        np.ascontiguousarray(pairs, dtype=np.int64),
    )


@njit(cache=True)
def _christoffel(X, eta, eps, pairs):
    n = X.shape[0]
    m = pairs.shape[0]
    D = n + m
    eb = np.conj(eta)
    G = np.zeros((D, D, D), dtype=np.complex128)
    # E[i, a] = f_a (d_ip eb_q + d_iq eb_p), c[a] = 2 f_a eb_p eb_q
    E = np.zeros((n, m), dtype=np.complex128)
    c = np.zeros(m, dtype=np.complex128)
    for a in range(m):
        p = pairs[a, 0]
        q = pairs[a, 1]
        fa = _f(p, q)
        c[a] = 2.0 * fa * eb[p] * eb[q]
        for i in range(n):
            E[i, a] = fa * (_d(i, p) * eb[q] + _d(i, q) * eb[p])

    for i in range(n):
        for j in range(n):
            for kk in range(n):
                G[i, j, kk] = -eps * (eb[j] * _d(i, kk) + eb[kk] * _d(i, j))
            for a in range(m):
                p = pairs[a, 0]
                q = pairs[a, 1]
                val = _f(p, q) * (_d(i, p) * X[q, j] + _d(i, q) * X[p, j])
                val -= eps * (eb[j] * E[i, a] + _d(i, j) * c[a])
                G[i, j, n + a] = val
                G[i, n + a, j] = val
        for a in range(m):
            for b in range(m):
                G[i, n + a, n + b] = -eps * (c[a] * E[i, b] + c[b] * E[i, a])

    for a in range(m):
        p = pairs[a, 0]
        q = pairs[a, 1]
        for j in range(n):
            for kk in range(n):
                G[n + a, j, kk] = eps * (_d(p, j) * _d(q, kk) + _d(p, kk) * _d(q, j))
        for i in range(n):
            for b in range(m):
                val = eps * (_d(i, q) * E[p, b] + _d(i, p) * E[q, b])
                G[n + a, i, n + b] = val
                G[n + a, n + b, i] = val
        for b in range(m):
            r = pairs[b, 0]
            s = pairs[b, 1]
            for cc in range(m):
                u = pairs[cc, 0]
                v = pairs[cc, 1]
                fbc = _f(r, s) * _f(u, v)
                t1 = _d(r, p) * (X[s, u] * _d(v, q) + X[s, v] * _d(u, q)) + _d(s, p) * (
                    X[r, u] * _d(v, q) + X[r, v] * _d(u, q)
                )
                t2 = _d(u, p) * (X[v, r] * _d(s, q) + X[v, s] * _d(r, q)) + _d(v, p) * (
                    X[u, r] * _d(s, q) + X[u, s] * _d(r, q)
                )
                G[n + a, n + b, n + cc] = fbc * (t1 + t2) + eps * (
                    E[p, b] * E[q, cc] + E[p, cc] * E[q, b]
                )
    return G


def christoffel(X, eta, eps, pairs):
    """Flat Christoffel tensor ``G[c, a, b] = Gamma^c_{ab}``."""
    return _christoffel(
        np.ascontiguousarray(X, dtype=np.complex128),
        np.ascontiguousarray(eta, dtype=np.complex128),
        float(eps),
        np.ascontiguousarray(pairs, dtype=np.int64),
    )
