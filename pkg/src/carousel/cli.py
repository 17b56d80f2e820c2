"""Command-line interface.

Exit codes: 0 success, 2 infeasible input / solver failure, 3 certificate
refuted, 4 certificate inconclusive, 5 numeric failure.  All outputs are
JSON on stdout; file artifacts (CSV/SVG/JSON) land next to --out paths.

The environment variable CAROUSEL_PRECISION (double | extended) selects
the working precision of certification sweeps; CAROUSEL_BACKEND
(numba | numpy) selects the kernel backend.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dynamics, refine, serialize, spectral
from .carousel import assemble_positions, assemble_trajectory, assemble_velocity, phase_scan, plan_rational, plan_from_eps
from .core import Alpha, CollisionError, ConvergenceError, InfeasiblePlanError
from .central_config import lagrange_config, polygon_config, solve_central_config, amended_potential

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_REFUTED = 3
EXIT_INCONCLUSIVE = 4
EXIT_NUMERIC = 5


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=float)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    print(text)


def _masses(text):
    return [float(x) for x in text.split(",")]


def _verdict_exit(verdict: str) -> int:
    return {"certified": EXIT_OK, "refuted": EXIT_REFUTED, "inconclusive": EXIT_INCONCLUSIVE}[verdict]


def _default_precision() -> str:
    p = os.environ.get("CAROUSEL_PRECISION", "double").strip().lower()
    if p not in ("double", "extended"):
        raise ValueError(f"CAROUSEL_PRECISION must be double or extended, got {p!r}")
    return p


# ---------------------------------------------------------------------------
# cc
# ---------------------------------------------------------------------------


def _cmd_cc(args) -> int:
    if args.sub == "polygon":
        cc = polygon_config(args.k, Alpha.parse(args.alpha), mass=args.mass)
    elif args.sub == "lagrange":
        m = _masses(args.masses)
        cc = lagrange_config(m[0], m[1], m[2], Alpha.parse(args.alpha))
    elif args.sub == "solve":
        seed = serialize.load_cc(args.infile)
        alpha = Alpha.parse(args.alpha) if args.alpha else seed.alpha
        try:
            cc = solve_central_config(seed.positions, seed.masses, alpha, tol=args.tol)
        except (ConvergenceError, CollisionError) as exc:
            _emit({"error": str(exc)})
            return EXIT_INFEASIBLE
    elif args.sub == "verify":
        cc = serialize.load_cc(args.infile)
        g = amended_potential(cc.positions, cc.masses, cc.alpha, order=1).gradient
        res = float(np.linalg.norm(g))
        _emit({"residual": res, "alpha": cc.alpha.value, "n": cc.n})
        return EXIT_OK
    else:  # pragma: no cover
        raise AssertionError(args.sub)
    _emit(serialize.cc_to_dict(cc), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------


def _parse_k_range(text):
    if ".." in text:
        lo, hi = text.split("..")
        return range(int(lo), int(hi) + 1)
    return [int(text)]


def _cmd_certify(args) -> int:
    precision = args.precision or _default_precision()
    if args.sub == "polygon-weak":
        res = spectral.certify_polygon_weak(args.k, args.p, Alpha.parse(args.alpha))
        _emit(res.to_dict(), args.out)
        return _verdict_exit(res.verdict)
    if args.sub == "polygon-grav":
        ks = _parse_k_range(args.k_range) if args.k_range else [args.k]
        if ks is None or not len(ks):
            raise ValueError("give --k or --k-range")

        def run(k):
            r = spectral.certify_polygon_grav(k, args.m, precision=precision)
            if r.verdict == "inconclusive" and precision == "double":
                r = spectral.certify_polygon_grav(k, args.m, precision="extended")
                r.conditions_log.append("retried at extended precision after straddling enclosure")
            return r

        if args.jobs > 1 and len(ks) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as ex:
                results = list(ex.map(run, ks))
        else:
            results = [run(k) for k in ks]
        if len(results) == 1:
            _emit(results[0].to_dict(), args.out)
            return _verdict_exit(results[0].verdict)
        summary = {
            "k_range": [min(ks), max(ks)],
            "m": args.m,
            "all_certified": all(r.verdict == "certified" for r in results),
            "min_margin": min(r.margin for r in results),
            "min_block_margin": min(r.data.get("block_margin", math.inf) for r in results),
            "verdicts": {str(k): r.verdict for k, r in zip(ks, results) if r.verdict != "certified"},
        }
        _emit(summary, args.out)
        if summary["all_certified"]:
            return EXIT_OK
        worst = [r.verdict for r in results]
        return EXIT_REFUTED if "refuted" in worst else EXIT_INCONCLUSIVE
    if args.sub == "lagrange":
        m = _masses(args.masses)
        res = spectral.certify_lagrange(m[0], m[1], m[2], Alpha.parse(args.alpha), p=args.p, m=args.m)
        _emit(res.to_dict(), args.out)
        return _verdict_exit(res.verdict)
    if args.sub == "a0":
        cc = serialize.load_cc(args.infile)
        res = spectral.certify_a0(cc, tol=args.tol)
        _emit(res.to_dict(), args.out)
        return _verdict_exit(res.verdict)
    if args.sub == "general":
        cc = serialize.load_cc(args.infile)
        res = spectral.certify_general(cc, args.p, tol=args.tol)
        _emit(res.to_dict(), args.out)
        return _verdict_exit(res.verdict)
    raise AssertionError(args.sub)  # pragma: no cover


# ---------------------------------------------------------------------------
# carousel pipeline
# ---------------------------------------------------------------------------


def _load_job(args):
    with open(args.job, encoding="utf-8") as f:
        job = json.load(f)
    return serialize.job_from_dict(job)


def _cmd_carousel(args) -> int:
    if args.sub == "plan":
        alpha = Alpha.parse(args.alpha)
        p_list = [int(x) for x in args.p.split(",")]
        if args.eps is not None:
            plan = plan_from_eps(p_list, args.eps, alpha, allow_retrograde=args.allow_retrograde)
        else:
            plan = plan_rational(p_list, args.nu_p, args.q, alpha, allow_retrograde=args.allow_retrograde)
        _emit(serialize.plan_to_dict(plan), args.out)
        return EXIT_OK

    family, plan = _load_job(args)
    prefix = getattr(args, "out_prefix", None) or "carousel_run"

    if args.sub == "synthesize":
        T = plan.period or 2.0 * math.pi
        ts = np.linspace(0.0, T, args.samples)
        pos = assemble_positions(family, plan, ts)
        serialize.trajectory_csv(ts, pos, f"{prefix}_trajectory.csv")
        serialize.orbit_svg(pos, family.index, f"{prefix}_orbit.svg")
        with open(f"{prefix}_plan.json", "w", encoding="utf-8") as f:
            json.dump(serialize.plan_to_dict(plan), f, indent=2)
        _emit(
            {
                "written": [f"{prefix}_trajectory.csv", f"{prefix}_orbit.svg", f"{prefix}_plan.json"],
                "period": T,
                "eps": plan.eps,
            }
        )
        return EXIT_OK

    if args.sub == "simulate":
        return _simulate(args, family, plan, refined=None)

    if args.sub == "phase-scan":
        scan = phase_scan(family, plan, grid_size=args.grid)
        _emit(
            {
                "symmetry": list(scan.symmetry),
                "flat": scan.flat,
                "note": scan.note,
                "n_samples": len(scan.values),
                "value_range": [float(scan.values.min()), float(scan.values.max())],
                "extrema": [
                    {"phases": list(ph), "value": v, "kind": kind} for ph, v, kind in scan.extrema
                ],
            },
            args.out,
        )
        return EXIT_OK

    if args.sub == "refine":
        opts = refine.RefineOpts(tol=args.tol, L=args.L)
        init = refine.lift_family(family, plan, L=args.L)
        try:
            path, report = refine.refine_orbit(init, plan, family, opts)
        except (ConvergenceError, CollisionError) as exc:
            _emit({"error": str(exc)})
            return EXIT_NUMERIC
        out = args.out or f"{prefix}_refined.json"
        with open(out, "w", encoding="utf-8") as f:
            json.dump(serialize.path_to_dict(path, plan, family), f)
        resid = refine.inertial_residual(path, plan, family)
        metrics = {
            "refined_path": out,
            "grad_norm": report.grad_norm,
            "iterations": report.iterations,
            "L": report.L,
            "tail_energy": report.tail_energy,
            "nbody_residual": resid,
        }
        code = _simulate(args, family, plan, refined=path, extra=metrics)
        return code
    raise AssertionError(args.sub)  # pragma: no cover


def _simulate(args, family, plan, refined=None, extra=None) -> int:
    if not plan.rational:
        _emit({"error": "simulation requires a rational plan (finite period)"})
        return EXIT_INFEASIBLE
    T = plan.period
    rtol = getattr(args, "rtol", 1e-12)
    if refined is None:
        q0 = assemble_trajectory(family, plan, 0.0)
        v0 = assemble_velocity(family, plan, 0.0)
        state0 = dynamics.PhaseState(q0.positions, v0, 0.0)
        masses = q0.masses
    else:
        state0 = refine.to_inertial(refined, plan, 0.0)
        masses = assemble_trajectory(family, plan, 0.0).masses
    try:
        traj = dynamics.integrate(state0, masses, plan.alpha, T, rtol=rtol, atol=rtol * 1e-2, index=family.index)
    except CollisionError as exc:
        _emit({"error": f"collision during integration: {exc}"})
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        _emit({"error": f"integrator failure: {exc}"})
        return EXIT_NUMERIC
    defect = dynamics.periodicity_defect(traj, T)
    wind = dynamics.winding_numbers(traj, plan)
    out = {
        "period": T,
        "eps": plan.eps,
        "periodicity_defect": defect,
        "invariant_drift": traj.drift(),
        "winding_base": wind.base,
        "winding_clusters": list(wind.clusters),
        "winding_residual": wind.residual,
    }
    if extra:
        out.update(extra)
    _emit(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carousel", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    cc = sub.add_parser("cc", help="central configuration generators and checks")
    ccs = cc.add_subparsers(dest="sub", required=True)
    g = ccs.add_parser("polygon")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--alpha", required=True)
    g.add_argument("--mass", type=float, default=1.0)
    g.add_argument("--out")
    g = ccs.add_parser("lagrange")
    g.add_argument("--masses", required=True)
    g.add_argument("--alpha", required=True)
    g.add_argument("--out")
    g = ccs.add_parser("solve")
    g.add_argument("--in", dest="infile", required=True)
    g.add_argument("--alpha")
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--out")
    g = ccs.add_parser("verify")
    g.add_argument("--in", dest="infile", required=True)

    ct = sub.add_parser("certify", help="nondegeneracy certificates")
    cts = ct.add_subparsers(dest="sub", required=True)
    g = cts.add_parser("polygon-weak")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--alpha", required=True)
    g.add_argument("--precision")
    g.add_argument("--out")
    g = cts.add_parser("polygon-grav")
    g.add_argument("--k", type=int)
    g.add_argument("--k-range", dest="k_range")
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--precision")
    g.add_argument("--out")
    g = cts.add_parser("lagrange")
    g.add_argument("--masses", required=True)
    g.add_argument("--alpha", required=True)
    g.add_argument("--p", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--precision")
    g.add_argument("--out")
    g = cts.add_parser("a0")
    g.add_argument("--in", dest="infile", required=True)
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--precision")
    g.add_argument("--out")
    g = cts.add_parser("general")
    g.add_argument("--in", dest="infile", required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--tol", type=float, default=1e-9)
    g.add_argument("--precision")
    g.add_argument("--out")

    ca = sub.add_parser("carousel", help="plan, synthesize, simulate, refine")
    cas = ca.add_subparsers(dest="sub", required=True)
    g = cas.add_parser("plan")
    g.add_argument("--p", required=True, help="comma-separated cluster integers p_j")
    g.add_argument("--q", type=int, default=1)
    g.add_argument("--nu-p", dest="nu_p", type=int)
    g.add_argument("--eps", type=float)
    g.add_argument("--alpha", required=True)
    g.add_argument("--allow-retrograde", action="store_true")
    g.add_argument("--out")
    g = cas.add_parser("synthesize")
    g.add_argument("--job", required=True)
    g.add_argument("--out-prefix", dest="out_prefix")
    g.add_argument("--samples", type=int, default=1024)
    g = cas.add_parser("simulate")
    g.add_argument("--job", required=True)
    g.add_argument("--rtol", type=float, default=1e-12)
    g = cas.add_parser("refine")
    g.add_argument("--job", required=True)
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--L", type=int, default=32)
    g.add_argument("--rtol", type=float, default=1e-13)
    g.add_argument("--out")
    g.add_argument("--out-prefix", dest="out_prefix")
    g = cas.add_parser("phase-scan")
    g.add_argument("--job", required=True)
    g.add_argument("--grid", type=int, default=32)
    g.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "cc":
            return _cmd_cc(args)
        if args.cmd == "certify":
            return _cmd_certify(args)
        if args.cmd == "carousel":
            return _cmd_carousel(args)
    except InfeasiblePlanError as exc:
        _emit({"error": str(exc)})
        return EXIT_INFEASIBLE
    except (ConvergenceError, CollisionError) as exc:
        _emit({"error": str(exc)})
        return EXIT_NUMERIC
    raise AssertionError(args.cmd)  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
