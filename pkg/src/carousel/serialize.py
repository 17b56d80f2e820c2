"""File formats: JSON for configurations, certificates, plans and refined
paths; CSV for trajectories and invariant ledgers; SVG orbit plots.

All JSON payloads are schema-validated on the way in.
"""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction

import numpy as np
from jsonschema import validate

from .carousel import CarouselFamily, CarouselPlan, make_family, plan_from_eps, plan_rational
from .central_config import CentralConfiguration, binary_config, lagrange_config, polygon_config, solve_central_config
from .core import Alpha, ClusterIndex
from .refine import FourierPath

__all__ = [
    "cc_to_dict",
    "cc_from_dict",
    "load_cc",
    "save_cc",
    "plan_to_dict",
    "job_from_dict",
    "path_to_dict",
    "path_from_dict",
    "trajectory_csv",
    "ledger_csv",
    "orbit_svg",
    "CC_SCHEMA",
    "JOB_SCHEMA",
]

CC_SCHEMA = {
    "type": "object",
    "required": ["alpha", "masses", "positions"],
    "properties": {
        "alpha": {"type": "number"},
        "alpha_exact": {"type": "string"},
        "masses": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "positions": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "residual": {"type": "number"},
    },
}

_GEN_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["polygon", "lagrange", "binary", "custom", "solve"]},
        "k": {"type": "integer", "minimum": 2},
        "mass": {"type": "number"},
        "masses": {"type": "array", "items": {"type": "number"}},
        "positions": {"type": "array"},
        "site": {"type": "integer", "minimum": 1},
    },
}

JOB_SCHEMA = {
    "type": "object",
    "required": ["alpha", "base", "clusters"],
    "properties": {
        "alpha": {"type": ["string", "number"]},
        "base": _GEN_SCHEMA,
        "clusters": {"type": "array", "items": _GEN_SCHEMA, "minItems": 1},
        "p_list": {"type": "array", "items": {"type": "integer"}},
        "plan": {
            "type": "object",
            "properties": {
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "q": {"type": "integer", "minimum": 1},
                "nu_p": {"type": "integer", "minimum": 1},
            },
        },
        "phases": {"type": "array", "items": {"type": "number"}},
        "allow_retrograde": {"type": "boolean"},
    },
}


def _alpha_fields(alpha: Alpha) -> dict:
    out = {"alpha": alpha.value}
    if alpha.exact is not None:
        out["alpha_exact"] = f"{alpha.exact.numerator}/{alpha.exact.denominator}"
    return out


def cc_to_dict(cc: CentralConfiguration) -> dict:
    d = _alpha_fields(cc.alpha)
    d.update(
        {
            "masses": [float(m) for m in cc.masses],
            "positions": [[float(x), float(y)] for x, y in cc.positions],
            "residual": float(cc.residual),
        }
    )
    return d


def cc_from_dict(d: dict) -> CentralConfiguration:
    validate(d, CC_SCHEMA)
    if "alpha_exact" in d:
        alpha = Alpha.parse(d["alpha_exact"])
    else:
        alpha = Alpha.parse(d["alpha"])
    from .central_config import amended_potential

    pos = np.array(d["positions"], dtype=float)
    m = np.array(d["masses"], dtype=float)
    res = d.get("residual")
    if res is None:
        res = float(np.linalg.norm(amended_potential(pos, m, alpha, order=1).gradient))
    return CentralConfiguration(pos, m, alpha, float(res))


def save_cc(cc: CentralConfiguration, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(cc_to_dict(cc), f, indent=2)


def load_cc(path) -> CentralConfiguration:
    with open(path, encoding="utf-8") as f:
        return cc_from_dict(json.load(f))


def plan_to_dict(plan: CarouselPlan) -> dict:
    d = _alpha_fields(plan.alpha)
    d.update(
        {
            "p_list": list(plan.p_list),
            "eps": plan.eps,
            "nu": plan.nu,
            "omega": list(plan.omega),
            "radii": list(plan.radii),
            "phases": list(plan.phases),
        }
    )
    if plan.rational:
        p, q = plan.rational
        d["rational"] = {"p": p, "q": q}
        d["period"] = plan.period
        d["winding_base"] = plan.winding_base
        d["winding_clusters"] = [plan.winding_cluster(j) for j in range(1, plan.n0 + 1)]
    d["diagnostics"] = plan.diagnostics()
    return d


def _build_generator(gen: dict, alpha: Alpha, total_mass: float | None = None) -> CentralConfiguration:
    kind = gen["type"]
    if kind == "polygon":
        k = gen["k"]
        mass = gen.get("mass")
        if mass is None:
            mass = (total_mass / k) if total_mass is not None else 1.0
        return polygon_config(k, alpha, mass=mass)
    if kind == "lagrange":
        m = gen["masses"]
        return lagrange_config(m[0], m[1], m[2], alpha)
    if kind == "binary":
        m = gen["masses"]
        return binary_config(m[0], m[1], alpha)
    if kind == "custom":
        pos = np.array(gen["positions"], dtype=float)
        m = np.array(gen["masses"], dtype=float)
        from .central_config import amended_potential

        res = float(np.linalg.norm(amended_potential(pos, m, alpha, order=1).gradient))
        return CentralConfiguration(pos, m, alpha, res)
    if kind == "solve":
        pos = np.array(gen["positions"], dtype=float)
        m = np.array(gen["masses"], dtype=float)
        return solve_central_config(pos, m, alpha)
    raise ValueError(f"unknown generator type {kind!r}")


def job_from_dict(job: dict):
    """Build (family, plan) from a job description.

    Cluster entries carry a 1-based 'site' (which base body they replace);
    sites are permuted to the front per the cluster-ordering convention.
    """
    validate(job, JOB_SCHEMA)
    alpha = Alpha.parse(job["alpha"])
    base = _build_generator(job["base"], alpha)
    sites = [c.get("site", i + 1) for i, c in enumerate(job["clusters"])]
    if len(set(sites)) != len(sites):
        raise ValueError("cluster sites must be distinct")
    if any(not 1 <= s <= base.n for s in sites):
        raise ValueError("cluster site out of range")
    perm = [s - 1 for s in sites] + [i for i in range(base.n) if i + 1 not in sites]
    base = CentralConfiguration(base.positions[perm], base.masses[perm], alpha, base.residual)
    clusters = []
    for i, gen in enumerate(job["clusters"]):
        total = float(base.masses[i])
        cc = _build_generator(gen, alpha, total_mass=total)
        clusters.append(cc)
    family = make_family(base, clusters)
    p_list = job.get("p_list", [1] * len(clusters))
    phases = job.get("phases", [0.0] * len(clusters))
    retro = bool(job.get("allow_retrograde", False))
    spec = job.get("plan", {})
    if "eps" in spec:
        plan = plan_from_eps(p_list, spec["eps"], alpha, phases=phases, allow_retrograde=retro)
    elif "q" in spec and "nu_p" in spec:
        plan = plan_rational(p_list, spec["nu_p"], spec["q"], alpha, phases=phases, allow_retrograde=retro)
    else:
        raise ValueError("plan must give either eps or (q, nu_p)")
    return family, plan


def _family_fingerprint(family: CarouselFamily, plan: CarouselPlan) -> str:
    blob = json.dumps(
        {
            "base": cc_to_dict(family.base),
            "clusters": [cc_to_dict(c) for c in family.clusters],
            "plan": plan_to_dict(plan),
        },
        sort_keys=True,
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def path_to_dict(path: FourierPath, plan: CarouselPlan, family: CarouselFamily) -> dict:
    return {
        "L": path.L,
        "blocks": [
            {"re": np.real(c).tolist(), "im": np.imag(c).tolist()} for c in path.coeffs
        ],
        "plan": plan_to_dict(plan),
        "fingerprint": _family_fingerprint(family, plan),
    }


def path_from_dict(d: dict) -> FourierPath:
    coeffs = [np.array(b["re"]) + 1j * np.array(b["im"]) for b in d["blocks"]]
    return FourierPath(int(d["L"]), coeffs)


def trajectory_csv(ts, positions, out) -> None:
    """CSV with header t, x_1, y_1, x_2, y_2, ... (flat body order)."""
    n = positions.shape[1]
    header = "t," + ",".join(f"x_{i+1},y_{i+1}" for i in range(n))
    flat = positions.reshape(len(ts), -1)
    data = np.column_stack([np.asarray(ts), flat])
    np.savetxt(out, data, delimiter=",", header=header, comments="")


def ledger_csv(traj, out) -> None:
    header = "t,energy,angular_momentum,px,py,com_x,com_y"
    data = np.column_stack(
        [traj.times, traj.energy, traj.angular_momentum, traj.linear_momentum, traj.com]
    )
    np.savetxt(out, data, delimiter=",", header=header, comments="")


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def orbit_svg(positions, index: ClusterIndex | None, out, size: int = 720) -> None:
    """Inertial-frame orbit plot: one polyline per body, one color per
    cluster."""
    pos = np.asarray(positions)  # (T, N, 2)
    n = pos.shape[1]
    lo = pos.reshape(-1, 2).min(axis=0)
    hi = pos.reshape(-1, 2).max(axis=0)
    span = max(float((hi - lo).max()), 1e-12)
    pad = 0.05 * span
    lo = lo - pad
    span = span + 2 * pad

    def to_px(xy):
        x = (xy[:, 0] - lo[0]) / span * size
        y = size - (xy[:, 1] - lo[1]) / span * size
        return x, y

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(n):
        if index is not None:
            j = 1
            off = 0
            for jj, kj in enumerate(index.cluster_sizes, start=1):
                if i < off + kj:
                    j = jj
                    break
                off += kj
            color = _PALETTE[(j - 1) % len(_PALETTE)]
        else:
            color = _PALETTE[i % len(_PALETTE)]
        x, y = to_px(pos[:, i])
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.0"/>')
        lines.append(f'<circle cx="{x[0]:.2f}" cy="{y[0]:.2f}" r="3" fill="{color}"/>')
    lines.append("</svg>")
    with open(out, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))
