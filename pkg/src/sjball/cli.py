"""``sjball`` command line.

Structured values are passed as inline JSON or as a path to a JSON file.
Exit codes: 0 success, 1 failed verification, 2 bad input or I/O.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .core import ModelParams, index_map
from .errors import SJBError
from .verify import DEFAULT_TOLERANCES, SUITES, run_suite


class UsageError(Exception):
    """Bad input; reported on stderr with exit code 2."""


def _params(arg: str) -> ModelParams:
    return jsonio.params_from_json(jsonio.load(arg))


def _point(arg: str, n: int | None = None):
    pt = jsonio.point_from_json(jsonio.load(arg))
    if n is not None and pt.z.shape[0] != n:
        raise UsageError(f"point has n={pt.z.shape[0]}, params have n={n}")
    return pt


def _tolerances(items) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        if not sep or name not in DEFAULT_TOLERANCES:
            raise UsageError(f"bad --tol {item!r}; expected NAME=VALUE with NAME in {sorted(DEFAULT_TOLERANCES)}")
        out[name] = float(val)
    return out


def _emit(obj) -> None:
    sys.stdout.write(jsonio.dumps(obj) + "\n")


# -- subcommands ------------------------------------------------------------------


def cmd_metric(a) -> int:
    from .metric import fd_metric_oracle, metric_matrix, relative_entry_error

    p = _params(a.params)
    pt = _point(a.point, p.n)
    h = metric_matrix(p, pt)
    out = {
        "h": jsonio.to_json(h.assembled),
        "blocks": {name: jsonio.to_json(getattr(h, name)) for name in ("h1", "h2", "h3", "h4")},
        "labels": index_map(p.n).labels,
    }
    if a.fd_check is not None:
        ref = fd_metric_oracle(p, pt, a.fd_check)
        out["fd_relative_error"] = relative_entry_error(ref, h.assembled)
    _emit(out)
    return 0


def cmd_christoffel(a) -> int:
    from .connection import christoffel, christoffel_fd_oracle, christoffel_relative_error

    p = _params(a.params)
    pt = _point(a.point, p.n)
    G = christoffel(p, pt)
    out = {"symbols": {key: [v.real, v.imag] for key, v in G.labelled(a.zero_tol).items()}}
    if a.fd_check is not None:
        out["fd_relative_error"] = christoffel_relative_error(christoffel_fd_oracle(p, pt, a.fd_check), G)
    _emit(out)
    return 0


def _csv_header(n: int) -> list[str]:
    cols = ["t"]
    for lab in index_map(n).labels:
        cols += [f"re_{lab}", f"im_{lab}"]
    return cols + ["speed", "residual"]


def write_trajectory_csv(path, times, positions, speeds, residuals) -> None:
    """Write one row per sample: time, Re/Im of each flat coordinate, speed, residual."""
    n = None
    D = positions.shape[1]
    for cand in range(1, D + 1):
        if cand + cand * (cand + 1) // 2 == D:
            n = cand
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_csv_header(n))
        for t, u, s, r in zip(times, positions, speeds, residuals):
            row = [repr(float(t))]
            for x in u:
                row += [repr(float(x.real)), repr(float(x.imag))]
            w.writerow(row + [repr(float(s)), repr(float(r))])


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Inverse of :func:`write_trajectory_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    coords = data[:, 1:-2]
    return {
        "labels": [h[3:] for h in header[1:-2:2]],
        "t": data[:, 0],
        "u": coords[:, 0::2] + 1j * coords[:, 1::2],
        "speed": data[:, -2],
        "residual": data[:, -1],
    }


def cmd_geodesic(a) -> int:
    from . import geodesics as gd
    from .core import flatten
    from .metric import _speed_raw

    p = _params(a.params)
    if a.mu_zero:
        p = ModelParams(p.n, p.k, 0.0)
    init = jsonio.state_from_json(jsonio.load(a.initial))
    if init.n != p.n:
        raise UsageError(f"initial state has n={init.n}, params have n={p.n}")

    if a.closed_form:
        if np.max(np.abs(init.W)) > 0:
            raise UsageError("closed forms start at W = 0")
        steps = a.steps or 1000
        times = np.linspace(0.0, a.t1, steps + 1)
        if a.mu_zero:
            jets = [gd.mu_zero_jet(init.vW, init.vz, init.z, t) for t in times]
        else:
            expect = -init.vW @ init.z.conj()
            if np.max(np.abs(init.vz - expect)) > 1e-12 * max(1.0, float(np.max(np.abs(expect)))):
                raise UsageError("closed form with mu != 0 needs vz = -vW conj(z) (the FC particular family)")
            jets = [gd.fc_particular_jet(init.z, init.vW, t) for t in times]
        states = [s for s, _ in jets]
        residuals = np.array([gd.geodesic_residual(p, s, acc) for s, acc in jets])
        speeds = np.array([_speed_raw(p.k, p.mu, s.z, s.W, s.vz, s.vW) for s in states])
        status = "ok"
    else:
        traj = gd.integrate_geodesic(p, init, a.t1, steps=a.steps, rel_tol=a.rtol)
        times, states, speeds, residuals, status = traj.times, traj.states, traj.speeds, traj.residuals, traj.status

    positions = np.array([flatten(s.z, s.W) for s in states])
    if a.out:
        write_trajectory_csv(a.out, times, positions, speeds, residuals)
    s0 = speeds[0]
    _emit(
        {
            "status": status,
            "samples": len(times),
            "t_final": float(times[-1]),
            "speed_drift": float(np.max(np.abs(speeds - s0)) / max(1.0, abs(s0))),
            "max_residual": float(np.max(residuals)),
            "final": jsonio.state_to_json(states[-1]),
            "out": a.out,
        }
    )
    return 0


def cmd_action(a) -> int:
    from .group import act, metric_invariance_check

    e = jsonio.group_from_json(jsonio.load(a.group))
    pt = _point(a.point, e.n)
    out = {"image": jsonio.point_to_json(act(e, pt))}
    if a.check_invariance:
        if not a.params:
            raise UsageError("--check-invariance needs --params")
        p = _params(a.params)
        out["invariance_deviation"] = metric_invariance_check(p, e, pt, samples=a.samples, seed=a.seed)
    _emit(out)
    return 0


def cmd_cayley(a) -> int:
    from . import cayley as cy

    if a.inverse:
        V = jsonio.from_json(jsonio.load(a.inverse), 2)
        _emit({"W": jsonio.to_json(cy.cayley_inverse(V))})
        return 0
    if not a.W:
        raise UsageError("cayley needs --W or --inverse")
    W = jsonio.from_json(jsonio.load(a.W), 2)
    V = cy.cayley(W)
    out = {"V": jsonio.to_json(V.V), "round_trip": float(np.max(np.abs(cy.cayley_inverse(V) - W)))}
    if a.dW:
        dW = jsonio.from_json(jsonio.load(a.dW), 2)
        dV = cy.cayley_differential(W, dW)
        out["dV"] = jsonio.to_json(dV)
        out["halfplane_metric"] = cy.halfplane_metric(V, dV)
        out["ball_metric"] = cy.ball_metric(W, dW)
    _emit(out)
    return 0


def cmd_curvature(a) -> int:
    from .connection import scalar_curvature, scalar_curvature_closed_form

    p = _params(a.params)
    pt = _point(a.point, p.n)
    _emit({"scalar_curvature": scalar_curvature(p, pt, a.step), "closed_form": scalar_curvature_closed_form(p)})
    return 0


def cmd_verify(a) -> int:
    rep = run_suite(
        a.suite,
        a.n,
        samples=a.samples,
        seed=a.seed,
        k=a.k,
        mu=a.mu,
        fd_step=a.fd_step,
        steps=a.steps,
        tolerances=_tolerances(a.tol),
    )
    _emit(rep)
    return 0 if rep["pass"] else 1


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sjball", description="Siegel-Jacobi ball geometry under the balanced metric.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("metric", help="metric matrix at a point")
    s.add_argument("--params", required=True, help='JSON {"n","k","mu"} or file')
    s.add_argument("--point", required=True, help='JSON {"z","W"} or file')
    s.add_argument("--fd-check", type=float, nargs="?", const=1e-4, default=None, metavar="STEP")
    s.set_defaults(func=cmd_metric)

    s = sub.add_parser("christoffel", help="nonzero Christoffel symbols")
    s.add_argument("--params", required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--fd-check", type=float, nargs="?", const=1e-4, default=None, metavar="STEP")
    s.add_argument("--zero-tol", type=float, default=1e-14, help="omit symbols below this magnitude")
    s.set_defaults(func=cmd_christoffel)

    s = sub.add_parser("geodesic", help="integrate or sample a geodesic")
    s.add_argument("--params", required=True)
    s.add_argument("--initial", required=True, help='JSON {"z","W","vz","vW"} or file')
    s.add_argument("--t1", type=float, default=1.0)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--steps", type=int, default=None, help="RK4 steps (default 1000)")
    g.add_argument("--rtol", type=float, default=None, help="adaptive RK45 relative tolerance")
    s.add_argument("--out", default=None, help="CSV path")
    s.add_argument("--closed-form", action="store_true", help="sample a closed-form solution from W = 0")
    s.add_argument("--mu-zero", action="store_true", help="use mu = 0")
    s.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("action", help="apply a Jacobi group element")
    s.add_argument("--group", required=True, help='JSON {"p","q","alpha","t"} or file')
    s.add_argument("--point", required=True)
    s.add_argument("--params", default=None)
    s.add_argument("--check-invariance", action="store_true")
    s.add_argument("--samples", type=int, default=5)
    s.add_argument("--seed", type=int, default=42)
    s.set_defaults(func=cmd_action)

    s = sub.add_parser("cayley", help="Cayley transform between ball and half-plane")
    s.add_argument("--W", default=None, help="ball matrix")
    s.add_argument("--dW", default=None, help="tangent vector at W")
    s.add_argument("--inverse", default=None, metavar="V", help="half-plane matrix to map back")
    s.set_defaults(func=cmd_cayley)

    s = sub.add_parser("curvature", help="scalar curvature at a point")
    s.add_argument("--params", required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--step", type=float, default=1e-3)
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("verify", help="run property suites")
    s.add_argument("--suite", choices=SUITES + ("all",), default="all")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--k", type=float, default=3.0)
    s.add_argument("--mu", type=float, default=1.5)
    s.add_argument("--fd-step", type=float, default=1e-4)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return a.func(a)
    except (UsageError, SJBError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"sjball: error: {exc}", file=sys.stderr)
        return 2


def run(argv) -> int:
    return main(argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
