"""Randomized property suites behind ``sjball verify``.

Every sample draws from its own generator seeded by ``(seed, suite, n,
index)``, so reports do not depend on the thread count. Samples may run
in parallel (capped by ``SJB_THREADS``); results are merged in index order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import cayley as cy
from . import connection as cn
from . import geodesics as gd
from . import group as gr
from . import metric as mt
from .core import ModelParams, random_ball_matrix, random_point, random_symmetric

SUITES = ("metric", "connection", "geodesic", "group", "cayley")

DEFAULT_TOLERANCES: dict[str, float] = {
    # metric
    "metric_fd": 1e-5,
    "inverse_contract": 1e-10,
    "hk_contract": 1e-10,
    "determinant": 1e-10,
    "hermitian": 1e-12,
    # connection
    "christoffel_fd": 1e-4,
    "christoffel_symmetry": 0.0,
    "connection_routes": 1e-10,
    "covariant_dz_routes": 1e-10,
    "covariant_dw_routes": 1e-10,
    "curvature_constancy": 1e-5,
    "curvature_closed_form": 1e-6,
    # geodesic
    "rhs_vs_christoffel": 1e-9,
    "speed_drift": 1e-8,
    "siegel_closed_form": 1e-10,
    "mu_zero_closed_form": 1e-8,
    "fc_particular": 1e-9,
    # group
    "group_axioms": 1e-9,
    "homomorphism": 1e-9,
    "action_forms": 1e-10,
    "metric_invariance": 1e-7,
    "fc_cross_blocks": 1e-7,
    "fc_w_block": 1e-7,
    "fc_eta_form": 1e-7,
    # cayley
    "cayley_round_trip": 1e-12,
    "metric_transfer": 1e-10,
    "sigma_identity": 1e-12,
    "halfplane_geodesic": 1e-7,
    "halfplane_invariance": 1e-7,
}

SUITE_CHECKS: dict[str, tuple[str, ...]] = {
    "metric": ("metric_fd", "inverse_contract", "hk_contract", "determinant", "hermitian"),
    "connection": (
        "christoffel_fd", "christoffel_symmetry", "connection_routes",
        "covariant_dz_routes", "covariant_dw_routes", "curvature_constancy", "curvature_closed_form",
    ),
    "geodesic": ("rhs_vs_christoffel", "speed_drift", "siegel_closed_form", "mu_zero_closed_form", "fc_particular"),
    "group": (
        "group_axioms", "homomorphism", "action_forms", "metric_invariance",
        "fc_cross_blocks", "fc_w_block", "fc_eta_form",
    ),
    "cayley": ("cayley_round_trip", "metric_transfer", "sigma_identity", "halfplane_geodesic", "halfplane_invariance"),
}

# RK4 runs dominate the geodesic suite; only the first few samples integrate.
MAX_INTEGRATIONS = 5


def thread_count() -> int:
    """Worker cap from ``SJB_THREADS`` (default: up to 4)."""
    raw = os.environ.get("SJB_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def sample_rng(seed: int, suite: str, n: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, SUITES.index(suite), n, index])


# -- per-sample checks ----------------------------------------------------------------


def _metric_sample(params, rng, opts):
    pt = random_point(params.n, rng)
    H = mt.metric_matrix(params, pt).assembled
    ref = mt.fd_metric_oracle(params, pt, opts["fd_step"])
    return {
        "metric_fd": mt.relative_entry_error(ref, H),
        "inverse_contract": mt.inverse_contract_deviation(params, pt),
        "hk_contract": mt.hk_inverse_contract(params, pt),
        "determinant": mt.metric_determinant(params, pt).relative_error,
        "hermitian": float(np.max(np.abs(H - H.conj().T))),
    }


def _connection_sample(params, rng, opts):
    pt = random_point(params.n, rng)
    G = cn.christoffel(params, pt)
    ref = cn.christoffel_fd_oracle(params, pt, opts["fd_step"])
    return {
        "christoffel_fd": cn.christoffel_relative_error(ref, G),
        "christoffel_symmetry": G.symmetry_defect(),
        "connection_routes": cn.connection_matrix(params, pt).route_deviation,
        "covariant_dz_routes": cn.covariant_derivative_dz(params, pt).route_deviation,
        "covariant_dw_routes": cn.covariant_derivative_dw(params, pt).route_deviation,
        "_curvature": cn.scalar_curvature(params, pt),
    }


def _geodesic_sample(params, rng, opts, index):
    n = params.n
    pt = random_point(n, rng, radius=0.5, z_scale=0.5)
    state = gd.GeodesicState(
        pt.z, pt.Wm, 0.3 * (rng.normal(size=n) + 1j * rng.normal(size=n)), random_symmetric(n, rng, 0.3)
    )
    a_rhs = np.concatenate([a.ravel() for a in gd.geodesic_rhs(params, state)])
    a_chr = np.concatenate([a.ravel() for a in gd.christoffel_acceleration(params, state)])
    out = {"rhs_vs_christoffel": float(np.max(np.abs(a_rhs - a_chr)))}
    if index < MAX_INTEGRATIONS:
        traj = gd.integrate_geodesic(params, state, 1.0, steps=opts["steps"])
        out["speed_drift"] = traj.speed_drift

    B = random_symmetric(n, rng, 0.5)
    times = np.linspace(0.0, 1.0, 101)
    out["siegel_closed_form"] = gd.siegel_fd_residual(B, times)

    vz0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    z0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    p0 = ModelParams(n, params.k, 0.0)
    states = [gd.mu_zero_jet(B, vz0, z0, t)[0] for t in times]
    out["mu_zero_closed_form"] = float(
        np.max(gd.fd_residuals(p0, times, [s.z for s in states], [s.W for s in states]))
    )

    eta0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    states = [gd.fc_particular_geodesic(eta0, B, t) for t in times]
    out["fc_particular"] = float(
        np.max(gd.fd_residuals(params, times, [s.z for s in states], [s.W for s in states]))
    )
    return out


def _group_sample(params, rng, opts):
    n = params.n
    seeds = rng.integers(0, 2**32, size=3)
    a, b, c = (gr.random_element(int(s), n) for s in seeds)
    e = gr.identity(n)
    axioms = max(
        gr.element_distance(gr.compose(gr.compose(a, b), c), gr.compose(a, gr.compose(b, c))),
        gr.element_distance(gr.compose(a, e), a),
        gr.element_distance(gr.compose(e, a), a),
        gr.element_distance(gr.compose(a, gr.inverse(a)), e),
        gr.element_distance(gr.compose(gr.inverse(a), a), e),
    )
    pt = random_point(n, rng, radius=0.6)
    lhs = gr.act(gr.compose(a, b), pt)
    rhs = gr.act(a, gr.act(b, pt))
    hom = float(max(np.max(np.abs(lhs.z - rhs.z)), np.max(np.abs(lhs.Wm - rhs.Wm))))
    eta = rng.normal(size=n) + 1j * rng.normal(size=n)
    rep = gr.fc_block_split_check(params, eta, random_ball_matrix(n, rng, 0.6))
    return {
        "group_axioms": axioms,
        "homomorphism": hom,
        "action_forms": gr.act_forms_deviation(a, pt),
        "metric_invariance": gr.metric_invariance_check(params, a, pt, seed=int(seeds[0])),
        "fc_cross_blocks": rep.max_cross,
        "fc_w_block": max(rep.w_block_metric, rep.w_block_form),
        "fc_eta_form": rep.eta_block_form,
    }


def _cayley_sample(params, rng, opts):
    n = params.n
    W = random_ball_matrix(n, rng)
    dW = random_symmetric(n, rng)
    B = random_symmetric(n, rng, 0.5)
    times = np.linspace(0.0, 1.0, 101)
    Vs = np.array([cy.cayley(Wt).V for Wt in gd.siegel_geodesic_closed_form(B, times)])
    g = cy.random_real_symplectic(int(rng.integers(0, 2**32)), n)
    return {
        "cayley_round_trip": float(np.max(np.abs(cy.cayley_inverse(cy.cayley(W)) - W))),
        "metric_transfer": cy.metric_transfer_deviation(W, dW),
        "sigma_identity": cy.sigma_identity_check(W).max_deviation,
        "halfplane_geodesic": cy.halfplane_geodesic_residual(Vs, float(times[1] - times[0])),
        "halfplane_invariance": cy.halfplane_invariance_check(g, cy.cayley(W).V, seed=int(rng.integers(0, 2**32))),
    }


_SAMPLERS: dict[str, Callable] = {
    "metric": _metric_sample,
    "connection": _connection_sample,
    "geodesic": _geodesic_sample,
    "group": _group_sample,
    "cayley": _cayley_sample,
}


# -- suite driver -----------------------------------------------------------------------


def _aggregate(suite, rows, params, tolerances):
    worst: dict[str, float] = {}
    for row in rows:
        for name, val in row.items():
            if not name.startswith("_"):
                worst[name] = max(worst.get(name, 0.0), float(val))
    if suite == "connection":
        s = np.array([row["_curvature"] for row in rows])
        mean = float(np.mean(s))
        worst["curvature_constancy"] = float(np.std(s) / abs(mean)) if mean < 0 else float("inf")
        ref = cn.scalar_curvature_closed_form(params)
        worst["curvature_closed_form"] = abs(mean - ref) / abs(ref)
    checks = []
    for name in SUITE_CHECKS[suite]:
        dev = worst.get(name, 0.0)
        tol = tolerances[name]
        checks.append({"name": name, "max_deviation": dev, "tol": tol, "pass": bool(dev <= tol)})
    return checks


def run_suite(
    suite: str,
    n: int,
    samples: int = 20,
    seed: int = 42,
    k: float = 3.0,
    mu: float = 1.5,
    fd_step: float = 1e-4,
    steps: int = 1000,
    tolerances: dict[str, float] | None = None,
    threads: int | None = None,
) -> dict:
    """Run one property suite, or all of them with ``suite="all"``.

    Returns
    -------
    dict
        ``{suite, n, samples, seed, k, mu, max_deviation, pass, checks}``;
        ``suite="all"`` nests the individual reports under ``suites``.
    """
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(tol)
        if unknown:
            raise KeyError(f"unknown tolerance names: {sorted(unknown)}")
        tol.update(tolerances)
    if samples < 1:
        raise ValueError("samples must be positive")
    kw = dict(samples=samples, seed=seed, k=k, mu=mu, fd_step=fd_step, steps=steps, tolerances=tol, threads=threads)
    if suite == "all":
        reports = [run_suite(s, n, **kw) for s in SUITES]
        return {
            "suite": "all",
            "n": n,
            "samples": samples,
            "seed": seed,
            "k": k,
            "mu": mu,
            "max_deviation": max(r["max_deviation"] for r in reports),
            "pass": all(r["pass"] for r in reports),
            "suites": reports,
        }
    if suite not in _SAMPLERS:
        raise KeyError(f"unknown suite {suite!r}")
    params = ModelParams(n, k, mu)
    opts = {"fd_step": fd_step, "steps": steps}
    sampler = _SAMPLERS[suite]

    def job(i):
        rng = sample_rng(seed, suite, n, i)
        if suite == "geodesic":
            return sampler(params, rng, opts, i)
        return sampler(params, rng, opts)

    workers = threads or thread_count()
    if workers == 1:
        rows = [job(i) for i in range(samples)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(job, range(samples)))
    checks = _aggregate(suite, rows, params, tol)
    return {
        "suite": suite,
        "n": n,
        "samples": samples,
        "seed": seed,
        "k": k,
        "mu": mu,
        "max_deviation": max(c["max_deviation"] for c in checks),
        "pass": all(c["pass"] for c in checks),
        "checks": checks,
    }
