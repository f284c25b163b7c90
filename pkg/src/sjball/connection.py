"""Christoffel symbols, connection matrix, covariant derivatives and curvature.

Flat Christoffel tensors are stored as ``G[c, a, b] = Gamma^c_{ab}`` over
the ordered chart, so the geodesic equation reads
``u''_c + G[c, a, b] u'_a u'_b = 0``. Symmetric bilinear forms in the
differentials ``du`` are stored as symmetric ``(D, D)`` coefficient
matrices ``Q`` with ``form(du) = du^t Q du``.
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
    ball_margin,
    index_map,
    ordered_pairs,
    pair_tensor,
    unflatten,
)
from .errors import NotInBallError, SingularMetricError, StepTooLargeError
from .fd import richardson, wirtinger_gradient, wirtinger_hessian
from .metric import _metric_raw, log_det_metric, metric_matrix


def _expand_pairs(arr: np.ndarray, n: int) -> np.ndarray:
    """Turn a trailing ordered-pair axis into two symmetric matrix axes."""
    P = ordered_pairs(n)
    out = np.zeros(arr.shape[:-1] + (n, n), dtype=arr.dtype)
    out[..., P[:, 0], P[:, 1]] = arr
    out[..., P[:, 1], P[:, 0]] = arr
    return out


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    """Holomorphic derivatives of the auxiliary fields.

    ``w``-derivatives carry two trailing axes ``(i, k)`` meaning the ordered
    coordinate ``w_{min(i,k) max(i,k)}``.
    """

    dM_dw: np.ndarray
    dX_dw: np.ndarray
    dXbar_dw: np.ndarray
    deta_dz: np.ndarray
    detabar_dz: np.ndarray
    deta_dw: np.ndarray
    detabar_dw: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def derivative_bundle(params: ModelParams, point: JacobiBallPoint) -> DerivativeBundle:
    """Closed-form derivatives of ``M``, ``X``, ``conj(X)``, ``eta`` and ``conj(eta)``."""
    aux = aux_matrices(params, point)
    n = params.n
    M, X, eb = aux.M, aux.X, aux.eta.conj()
    f = np.where(np.eye(n, dtype=bool), 0.5, 1.0)
    dM = (np.einsum("ai,kb->abik", M, X) + np.einsum("ak,ib->abik", M, X)) * f
    dX = (np.einsum("ai,bk->abik", X, X) + np.einsum("ak,ib->abik", X, X)) * f
    dXb = (np.einsum("ai,bk->abik", M, M) + np.einsum("ak,bi->abik", M, M)) * f
    deta = (np.einsum("tp,q->tpq", M, eb) + np.einsum("tq,p->tpq", M, eb)) * f
    detab = (np.einsum("p,qt->tpq", eb, X) + np.einsum("q,pt->tpq", eb, X)) * f
    return DerivativeBundle(
        dM_dw=_readonly(dM),
        dX_dw=_readonly(dX),
        dXbar_dw=_readonly(dXb),
        deta_dz=_readonly(M),
        detabar_dz=_readonly(X),
        deta_dw=_readonly(deta),
        detabar_dw=_readonly(detab),
    )


def derivative_bundle_fd(params: ModelParams, point: JacobiBallPoint, step: float = 1e-5) -> DerivativeBundle:
    """Same tensors by Wirtinger central differences of the auxiliary fields."""
    n = params.n

    def fields(u):
        z, W = unflatten(u, n)
        _, M, X, eta = _aux_arrays(z, W)
        return np.concatenate([M.ravel(), X.ravel(), X.conj().ravel(), eta, eta.conj()])

    g = wirtinger_gradient(fields, point.to_flat(), step)
    nn = n * n
    gM, gX, gXb = g[:nn], g[nn : 2 * nn], g[2 * nn : 3 * nn]
    geta, getab = g[3 * nn : 3 * nn + n], g[3 * nn + n :]
    w = slice(n, None)
    return DerivativeBundle(
        dM_dw=_readonly(_expand_pairs(gM[:, w].reshape(n, n, -1), n)),
        dX_dw=_readonly(_expand_pairs(gX[:, w].reshape(n, n, -1), n)),
        dXbar_dw=_readonly(_expand_pairs(gXb[:, w].reshape(n, n, -1), n)),
        deta_dz=_readonly(geta[:, :n]),
        detabar_dz=_readonly(getab[:, :n]),
        deta_dw=_readonly(_expand_pairs(geta[:, w], n)),
        detabar_dw=_readonly(_expand_pairs(getab[:, w], n)),
    )


# -- Christoffel symbols ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChristoffelTensor:
    """The six families of holomorphic Christoffel symbols.

    ``flat[c, a, b]`` is ``Gamma^c_{ab}`` over the ordered chart; the family
    properties are views into it (upper index first).
    """

    n: int
    flat: np.ndarray

    @property
    def g_zzz(self):
        """``Gamma^i_{jk}``."""
        n = self.n
        return self.flat[:n, :n, :n]

    @property
    def g_zzw(self):
        """``Gamma^i_{j,pq}``."""
        n = self.n
        return self.flat[:n, :n, n:]

    @property
    def g_wzz(self):
        """``Gamma^{pq}_{jk}``."""
        n = self.n
        return self.flat[n:, :n, :n]

    @property
    def g_wzw(self):
        """``Gamma^{pq}_{i,mn}``."""
        n = self.n
        return self.flat[n:, :n, n:]

    @property
    def g_zww(self):
        """``Gamma^i_{pq,mn}``."""
        n = self.n
        return self.flat[:n, n:, n:]

    @property
    def g_www(self):
        """``Gamma^{pq}_{mn,uv}``."""
        n = self.n
        return self.flat[n:, n:, n:]

    def symmetry_defect(self) -> float:
        """``max |Gamma^c_{ab} - Gamma^c_{ba}|``."""
        return float(np.max(np.abs(self.flat - self.flat.transpose(0, 2, 1))))

    def contract(self, v) -> np.ndarray:
        """``sum_ab Gamma^c_{ab} v_a v_b``."""
        v = np.asarray(v, dtype=complex)
        return np.einsum("cab,a,b->c", self.flat, v, v)

    def labelled(self, tol: float = 0.0) -> dict[str, complex]:
        """Entries with ``a <= b`` keyed like ``"i=1,pq=12,mn=22"``."""
        labels = index_map(self.n).labels

        def key(lab):
            return f"i={lab[1:]}" if lab[0] == "z" else f"pq={lab[1:]}"

        out = {}
        D = self.flat.shape[0]
        for c in range(D):
            for a in range(D):
                for b in range(a, D):
                    val = self.flat[c, a, b]
                    if abs(val) > tol:
                        out[",".join(key(labels[x]) for x in (c, a, b))] = complex(val)
        return out


def _christoffel_raw(eps, X, eta, n, backend=None) -> np.ndarray:
    kern = kernels.get_backend(backend)
    return kern.christoffel(X, eta, eps, ordered_pairs(n))


def christoffel(params: ModelParams, point: JacobiBallPoint, backend: str | None = None) -> ChristoffelTensor:
    """Closed-form Christoffel symbols of the balanced metric.

    With ``e = conj(eta)``, ``eps = mu / k`` and ``f_pq = 1 - delta_pq / 2``::

        Gamma^i_{jk}     = -eps (e_j d_ik + e_k d_ij)
        Gamma^i_{j,pq}   = [d_ip X_qj + d_iq X_pj
                            - eps (e_j (d_ip e_q + d_iq e_p) + 2 e_p e_q d_ij)] f_pq
        Gamma^{pq}_{jk}  = eps (d_pj d_qk + d_pk d_qj)
        Gamma^{pq}_{i,mn}= eps [e_m (d_np d_iq + d_nq d_ip) + e_n (d_mp d_iq + d_mq d_ip)] f_mn
        Gamma^i_{pq,mn}  = -2 eps f_pq f_mn [e_p e_q (d_im e_n + d_in e_m)
                                              + e_m e_n (d_ip e_q + d_iq e_p)]

    and ``Gamma^{pq}_{mn,uv}`` is the Siegel-ball part ``(T_mn X T_uv + T_uv X T_mn)_pq``
    plus ``eps f_mn f_uv`` times the symmetrised ``e e`` products.
    """
    aux = aux_matrices(params, point)
    G = _christoffel_raw(params.epsilon, aux.X, aux.eta, params.n, backend)
    return ChristoffelTensor(params.n, _readonly(G))


def christoffel_fd_oracle(params: ModelParams, point: JacobiBallPoint, step: float = 1e-4) -> ChristoffelTensor:
    """Christoffel symbols from finite differences of the metric.

    ``Gamma^c_{ab} = sum_e (d h_{b conj(e)} / du_a) h^{e c}`` with the metric
    derivative taken by Wirtinger central differences of the closed-form
    metric and the inverse computed numerically.
    """
    if params.mu == 0:
        raise SingularMetricError("metric is degenerate for mu = 0")
    n, k, mu = params.n, params.k, params.mu

    def H(u):
        z, W = unflatten(u, n)
        if ball_margin(W) <= 0:
            raise StepTooLargeError("finite-difference stencil leaves the ball")
        return _metric_raw(k, mu, z, W)

    u = point.to_flat()
    dH = wirtinger_gradient(H, u, step)
    Hinv = np.linalg.inv(H(u))
    G = np.einsum("bea,ec->cab", dH, Hinv)
    return ChristoffelTensor(n, _readonly(G))


def christoffel_relative_error(reference: ChristoffelTensor, other: ChristoffelTensor) -> float:
    """Max entry difference over the largest reference entry (floored at 1)."""
    scale = max(1.0, float(np.max(np.abs(reference.flat))))
    return float(np.max(np.abs(reference.flat - other.flat)) / scale)


# -- connection matrix and covariant derivatives ---------------------------------


def _linear_forms(params: ModelParams, aux):
    """Coefficient vectors over ``du`` of ``dz``, ``dW``, ``A = dz + dW conj(eta)``, ``X dz`` and ``Xi = X dW``."""
    n = params.n
    m = n * (n + 1) // 2
    D = n + m
    T = pair_tensor(n)
    dz = np.zeros((n, D), dtype=complex)
    dz[:, :n] = np.eye(n)
    dW = np.zeros((n, n, D), dtype=complex)
    dW[:, :, n:] = T.transpose(1, 2, 0)
    eb = aux.eta.conj()
    A = dz + np.einsum("isc,s->ic", dW, eb)
    Xdz = aux.X @ dz
    Xi = np.einsum("xs,syc->xyc", aux.X, dW)
    return dz, dW, A, Xdz, Xi


def _sym(a, b):
    """Coefficient matrix of the product of two linear forms."""
    return 0.5 * (np.einsum("...a,...b->...ab", a, b) + np.einsum("...a,...b->...ab", b, a))


@dataclass(frozen=True, eq=False)
class ConnectionMatrix:
    """Connection one-forms ``theta^a_b``.

    ``theta[a, b, :]`` holds the coefficients of ``theta^a_b`` over
    ``(dz_1, ..., dw_nn)``, built from the Christoffel contraction.
    ``closed_form`` holds the same array from the one-form expressions in
    ``Xi = X dW`` and ``A = dz + dW conj(eta)``.
    """

    n: int
    theta: np.ndarray
    closed_form: np.ndarray

    @property
    def route_deviation(self) -> float:
        return float(np.max(np.abs(self.theta - self.closed_form)))

    def evaluate(self, v) -> np.ndarray:
        """``theta^a_b(v)`` as a ``(D, D)`` matrix."""
        return self.theta @ np.asarray(v, dtype=complex)

    @property
    def zz(self):
        return self.theta[: self.n, : self.n]

    @property
    def zw(self):
        return self.theta[: self.n, self.n :]

    @property
    def wz(self):
        return self.theta[self.n :, : self.n]

    @property
    def ww(self):
        return self.theta[self.n :, self.n :]


def connection_matrix(params: ModelParams, point: JacobiBallPoint) -> ConnectionMatrix:
    """Connection matrix by two routes.

    Closed forms (``e = conj(eta)``)::

        theta^i_j     = Xi_ji - eps [e_j A_i + d_ij e^t A]
        theta^i_pq    = f_pq [d_ip (X dz)_q + d_iq (X dz)_p
                              - eps ((d_ip e_q + d_iq e_p) e^t A + 2 e_p e_q A_i)]
        theta^pq_i    = eps (d_iq A_p + d_ip A_q)
        theta^pq_mn   = [d_pm Xi_nq + d_pn Xi_mq + d_qm Xi_np + d_qn Xi_mp] f_mn
                        + eps [(e_n d_mq + e_m d_nq) A_p + (e_n d_mp + e_m d_np) A_q] f_mn
    """
    aux = aux_matrices(params, point)
    n, eps = params.n, params.epsilon
    eb = aux.eta.conj()
    I = np.eye(n)
    P = ordered_pairs(n)
    p, q = P[:, 0], P[:, 1]
    fa = np.where(p == q, 0.5, 1.0)
    _, _, A, Xdz, Xi = _linear_forms(params, aux)
    eA = eb @ A
    D = A.shape[1]
    C = np.zeros((D, D, D), dtype=complex)

    C[:n, :n] = Xi.transpose(1, 0, 2) - eps * (
        np.einsum("j,ic->ijc", eb, A) + np.einsum("ij,c->ijc", I, eA)
    )
    Ip, Iq = I[:, p], I[:, q]  # (i, a)
    zw = (
        np.einsum("ia,ac->iac", Ip, Xdz[q])
        + np.einsum("ia,ac->iac", Iq, Xdz[p])
        - eps
        * (
            np.einsum("ia,c->iac", Ip * eb[q] + Iq * eb[p], eA)
            + 2.0 * np.einsum("a,ic->iac", eb[p] * eb[q], A)
        )
    )
    C[:n, n:] = zw * fa[None, :, None]
    C[n:, :n] = eps * (np.einsum("ia,ac->aic", Iq, A[p]) + np.einsum("ia,ac->aic", Ip, A[q]))
    # rows a = (pp, qq), columns b = (mm, nn)
    pp, qq = p[:, None], q[:, None]
    mm, nn = p[None, :], q[None, :]
    d = lambda x, y: (x == y).astype(float)  # noqa: E731
    ww = (
        d(pp, mm)[..., None] * Xi[nn, qq]
        + d(pp, nn)[..., None] * Xi[mm, qq]
        + d(qq, mm)[..., None] * Xi[nn, pp]
        + d(qq, nn)[..., None] * Xi[mm, pp]
    )
    ww = ww + eps * (
        (eb[nn] * d(mm, qq) + eb[mm] * d(nn, qq))[..., None] * A[pp]
        + (eb[nn] * d(mm, pp) + eb[mm] * d(nn, pp))[..., None] * A[qq]
    )
    C[n:, n:] = ww * fa[None, :, None]

    G = christoffel(params, point).flat
    return ConnectionMatrix(n=n, theta=_readonly(G), closed_form=_readonly(C))


@dataclass(frozen=True, eq=False)
class CovariantForm:
    """Matrix-valued symmetric bilinear form from two assembly routes.

    ``forms[r]`` is the coefficient matrix of component ``r``.
    """

    closed_form: np.ndarray
    contraction: np.ndarray

    @property
    def route_deviation(self) -> float:
        return float(np.max(np.abs(self.closed_form - self.contraction)))

    def evaluate(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return np.einsum("rab,a,b->r", self.closed_form, v, v)


def covariant_derivative_dz(params: ModelParams, point: JacobiBallPoint) -> CovariantForm:
    """``-D(dz_i) / 2 = (dW X dz)_i - eps (conj(eta)^t A) A_i``.

    The contraction route is ``Gamma^i_{ab} / 2``, since
    ``-D(dz_i) = theta^i_a du_a``.
    """
    aux = aux_matrices(params, point)
    eps = params.epsilon
    _, dW, A, Xdz, _ = _linear_forms(params, aux)
    eA = aux.eta.conj() @ A
    closed = np.einsum("isa,sb->iab", dW, Xdz)
    closed = 0.5 * (closed + closed.transpose(0, 2, 1)) - eps * _sym(eA[None, :], A)
    G = christoffel(params, point).flat
    return CovariantForm(closed_form=_readonly(closed), contraction=_readonly(0.5 * G[: params.n]))


def covariant_derivative_dw(params: ModelParams, point: JacobiBallPoint) -> CovariantForm:
    """``-D(dW) = 2 eps A A^t + 2 dW X dW``, listed over ordered pairs.

    The contraction route is ``Gamma^{pq}_{ab}``.
    """
    aux = aux_matrices(params, point)
    n, eps = params.n, params.epsilon
    _, dW, A, _, _ = _linear_forms(params, aux)
    P = ordered_pairs(n)
    p, q = P[:, 0], P[:, 1]
    dWX = np.einsum("pxa,xy->pya", dW, aux.X)
    quad = np.einsum("pya,yqb->pqab", dWX, dW)
    quad = 0.5 * (quad + quad.transpose(0, 1, 3, 2))
    closed = 2.0 * eps * _sym(A[p], A[q]) + 2.0 * quad[p, q]
    G = christoffel(params, point).flat
    return CovariantForm(closed_form=_readonly(closed), contraction=_readonly(G[n:]))


# -- curvature -------------------------------------------------------------------


def scalar_curvature_closed_form(params: ModelParams) -> float:
    """``-n (n+1) (n+2) / k``: constant and negative, independent of ``mu``."""
    n = params.n
    return -n * (n + 1) * (n + 2) / params.k


def ricci_form(params: ModelParams, point: JacobiBallPoint, step: float = 1e-3, extrapolate: bool = True) -> np.ndarray:
    """``Ric[a, b] = -d^2 log det h / du_a dconj(u_b)`` by finite differences."""
    n = params.n

    def logdet(u):
        _, W = unflatten(u, n)
        try:
            return log_det_metric(params, W)
        except NotInBallError as exc:
            raise StepTooLargeError("finite-difference stencil leaves the ball") from exc

    u = point.to_flat()

    def est(h):
        return -wirtinger_hessian(logdet, u, h)

    R = richardson(est, step) if extrapolate else est(step)
    return 0.5 * (R + R.conj().T)


def scalar_curvature(params: ModelParams, point: JacobiBallPoint, step: float = 1e-3) -> float:
    """``tr(h^{-1} Ric)`` with the Ricci form from :func:`ricci_form`."""
    if params.mu == 0:
        raise SingularMetricError("metric is degenerate for mu = 0")
    R = ricci_form(params, point, step)
    H = metric_matrix(params, point).assembled
    return float(np.real(np.trace(np.linalg.solve(H, R))))
