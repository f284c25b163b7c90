"""Vectorized numpy kernels built on the pair-embedding tensor.

``T[a, i, j] = (d_pi d_qj + d_pj d_qi) f_pq`` maps the ordered pair
``a = (p, q)`` to a symmetric matrix slot, with ``f_pq = 1 - d_pq / 2``.
"""

import numpy as np


def pair_tensor(pairs: np.ndarray, n: int) -> np.ndarray:
    m = pairs.shape[0]
    T = np.zeros((m, n, n))
    for a in range(m):
        p, q = pairs[a]
        f = 0.5 if p == q else 1.0
        T[a, p, q] += f
        T[a, q, p] += f
    return T


def metric_blocks(M, eta, k, mu, pairs):
    """Blocks ``(h1, h2, h3, h4)`` of the metric in the ordered chart."""
    n = M.shape[0]
    T = pair_tensor(pairs, n)
    Mb = M.conj()
    E = np.einsum("ais,s->ia", T, eta.conj())
    Eb = E.conj()
    h1 = mu * Mb
    h2 = mu * Mb @ Eb
    h3 = mu * E.T @ Mb
    B = np.einsum("xy,ayc,dc,bdx->ab", M, T, M, T)
    h4 = mu * E.T @ Mb @ Eb + 0.5 * k * B
    return h1, h2, h3, h4


def christoffel(X, eta, eps, pairs):
    """Flat Christoffel tensor ``G[c, a, b] = Gamma^c_{ab}``."""
    n = X.shape[0]
    m = pairs.shape[0]
    D = n + m
    T = pair_tensor(pairs, n)
    fa = np.where(pairs[:, 0] == pairs[:, 1], 0.5, 1.0)
    eb = eta.conj()
    I = np.eye(n)
    E = np.einsum("ais,s->ia", T, eb)
    c = np.einsum("ars,r,s->a", T, eb, eb)
    G = np.zeros((D, D, D), dtype=complex)

    G[:n, :n, :n] = -eps * (np.einsum("j,ik->ijk", eb, I) + np.einsum("k,ij->ijk", eb, I))
    zzw = np.einsum("ais,sj->ija", T, X) - eps * (
        np.einsum("j,ia->ija", eb, E) + np.einsum("ij,a->ija", I, c)
    )
    G[:n, :n, n:] = zzw
    G[:n, n:, :n] = zzw.transpose(0, 2, 1)
    G[:n, n:, n:] = -eps * (np.einsum("a,ib->iab", c, E) + np.einsum("b,ia->iab", c, E))

    P, Q = pairs[:, 0], pairs[:, 1]
    G[n:, :n, :n] = eps * T / fa[:, None, None]
    wzw = eps * (np.einsum("ai,ab->aib", I[Q], E[P]) + np.einsum("ai,ab->aib", I[P], E[Q]))
    G[n:, :n, n:] = wzw
    G[n:, n:, :n] = wzw.transpose(0, 2, 1)
    TXT = np.einsum("bpx,xy,cyq->bcpq", T, X, T)
    www = TXT[:, :, P, Q] + TXT.transpose(1, 0, 2, 3)[:, :, P, Q]
    www = www.transpose(2, 0, 1)
    www = www + eps * (
        np.einsum("ab,ac->abc", E[P], E[Q]) + np.einsum("ac,ab->abc", E[P], E[Q])
    )
    G[n:, n:, n:] = www
    return G
