"""Carousel frequency plans and explicit approximate orbits.

Given a base central configuration a_0 (cluster centers, total masses)
and small central configurations a_j for the clusters, the approximate
carousel orbit is

    q_{j,k}(t) = exp(tJ) a_{0,j} + r_j exp((t w_j + theta_j) J) a_{j,k}

with w_j = 1 + p_j nu, r_j = (1 + p_j nu)^(-2/(alpha+1)) and
nu = eps^(-(alpha+1)/2) - 1.  For rational nu = p/q the orbit is
2 pi q-periodic: the centers wind q times around the origin and cluster
j winds q + p_j p times around its center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .central_config import CentralConfiguration, rotation_symmetry_order
from .core import Alpha, ClusterConfig, ClusterIndex, InfeasiblePlanError, as_complex, phi

__all__ = [
    "CarouselPlan",
    "CarouselFamily",
    "plan_from_eps",
    "plan_rational",
    "make_family",
    "assemble_trajectory",
    "assemble_velocity",
    "assemble_positions",
    "coupling_average",
    "phase_scan",
    "PhaseScan",
]


@dataclass(frozen=True)
class CarouselPlan:
    """Frequencies and amplitudes of one carousel: w_j = 1 + p_j nu and
    r_j = |1 + p_j nu|^(-2/(alpha+1)) exactly, nu = eps^(-(alpha+1)/2) - 1."""

    alpha: Alpha
    p_list: tuple
    eps: float
    nu: float
    omega: tuple
    radii: tuple
    phases: tuple
    rational: tuple | None = None  # (p, q) with nu = p/q

    @property
    def n0(self) -> int:
        return len(self.p_list)

    @property
    def period(self) -> float | None:
        """2 pi q for rational plans, None otherwise."""
        return 2.0 * math.pi * self.rational[1] if self.rational else None

    @property
    def winding_base(self) -> int:
        if not self.rational:
            raise ValueError("winding numbers require a rational plan")
        return self.rational[1]

    def winding_cluster(self, j: int) -> int:
        """q + p_j p turns of cluster j about its center per period."""
        if not self.rational:
            raise ValueError("winding numbers require a rational plan")
        p, q = self.rational
        return q + self.p_list[j - 1] * p

    def diagnostics(self) -> dict:
        """First-order checks: r_j/eps -> |p_j|^(-2/(alpha+1)) and
        w_j/nu - p_j -> 0 as eps -> 0."""
        return {
            "r_over_eps": [r / self.eps for r in self.radii],
            "omega_over_nu_minus_p": [w / self.nu - p for w, p in zip(self.omega, self.p_list)],
        }

    def with_phases(self, phases) -> "CarouselPlan":
        phases = tuple(float(t) % (2.0 * math.pi) for t in phases)
        if len(phases) != self.n0:
            raise ValueError("one phase per cluster required")
        return CarouselPlan(self.alpha, self.p_list, self.eps, self.nu, self.omega, self.radii, phases, self.rational)


def _amplitudes(p_list, nu, a, allow_retrograde):
    omega, radii = [], []
    for p in p_list:
        w = 1.0 + p * nu
        if w <= 0.0 and not allow_retrograde:
            raise InfeasiblePlanError(
                f"1 + p*nu = {w:g} <= 0 for p = {p} (retrograde p too negative for this eps); "
                "pass allow_retrograde=True to use the |omega| convention"
            )
        if w == 0.0:
            raise InfeasiblePlanError(f"1 + p*nu = 0 for p = {p}: the cluster cannot corotate")
        omega.append(w)
        radii.append(abs(w) ** (-2.0 / (a + 1.0)))
    return tuple(omega), tuple(radii)


def plan_from_eps(p_list, eps, alpha, phases=None, allow_retrograde: bool = False) -> CarouselPlan:
    """Plan from the shrink parameter eps > 0 via nu = eps^(-(alpha+1)/2) - 1."""
    alpha = Alpha.parse(alpha)
    a = alpha.value
    if eps <= 0.0:
        raise InfeasiblePlanError("eps must be positive")
    p_list = tuple(int(p) for p in p_list)
    if any(p == 0 for p in p_list):
        raise InfeasiblePlanError("every p_j must be a nonzero integer")
    nu = eps ** (-(a + 1.0) / 2.0) - 1.0
    omega, radii = _amplitudes(p_list, nu, a, allow_retrograde)
    if phases is None:
        phases = (0.0,) * len(p_list)
    return CarouselPlan(alpha, p_list, float(eps), nu, omega, radii, tuple(float(t) for t in phases))


def plan_rational(p_list, p: int, q: int, alpha, phases=None, allow_retrograde: bool = False) -> CarouselPlan:
    """Plan with rational frequency nu = p/q (p, q > 0 coprime), hence
    eps = (q/(p+q))^(2/(alpha+1)), period 2 pi q, and integer windings."""
    alpha = Alpha.parse(alpha)
    a = alpha.value
    p, q = int(p), int(q)
    if p <= 0 or q <= 0:
        raise InfeasiblePlanError("rational frequency needs p, q > 0")
    if math.gcd(p, q) != 1:
        raise InfeasiblePlanError(f"p/q = {p}/{q} is not in lowest terms")
    p_list = tuple(int(pj) for pj in p_list)
    if any(pj == 0 for pj in p_list):
        raise InfeasiblePlanError("every p_j must be a nonzero integer")
    nu = p / q
    eps = (q / (p + q)) ** (2.0 / (a + 1.0))
    omega, radii = [], []
    for pj in p_list:
        num = q + pj * p
        if num <= 0 and not allow_retrograde:
            raise InfeasiblePlanError(
                f"q + p_j p = {num} <= 0 for p_j = {pj}; pass allow_retrograde=True for the |omega| convention"
            )
        if num == 0:
            raise InfeasiblePlanError(f"q + p_j p = 0 for p_j = {pj}: the cluster cannot corotate")
        w = num / q
        omega.append(w)
        radii.append(abs(w) ** (-2.0 / (a + 1.0)))
    if phases is None:
        phases = (0.0,) * len(p_list)
    return CarouselPlan(alpha, p_list, eps, nu, tuple(omega), tuple(radii), tuple(float(t) for t in phases), rational=(p, q))


@dataclass(frozen=True)
class CarouselFamily:
    """Base configuration a_0 plus one small configuration per cluster."""

    base: CentralConfiguration
    clusters: tuple
    index: ClusterIndex

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def n0(self) -> int:
        return len(self.clusters)

    @property
    def alpha(self) -> Alpha:
        return self.base.alpha


def make_family(base: CentralConfiguration, clusters, residual_tol: float = 1e-8) -> CarouselFamily:
    """Validate that cluster j's total mass equals the base mass M_j and
    that every configuration is solved to residual_tol."""
    clusters = tuple(clusters)
    n0 = len(clusters)
    if n0 < 1 or n0 > base.n:
        raise ValueError("need 1..n cluster configurations")
    for j, cc in enumerate(clusters, start=1):
        if cc.alpha.value != base.alpha.value:
            raise ValueError(f"cluster {j} has a different force exponent than the base")
        if not math.isclose(cc.total_mass, base.masses[j - 1], rel_tol=1e-12):
            raise ValueError(
                f"cluster {j} total mass {cc.total_mass:g} != base mass M_{j} = {base.masses[j - 1]:g}"
            )
        if cc.residual > residual_tol:
            raise ValueError(f"cluster {j} residual {cc.residual:.2e} above {residual_tol:.0e}")
    if base.residual > residual_tol:
        raise ValueError(f"base residual {base.residual:.2e} above {residual_tol:.0e}")
    sizes = tuple(cc.n for cc in clusters) + (1,) * (base.n - n0)
    return CarouselFamily(base, clusters, ClusterIndex(sizes))


def _angles(plan: CarouselPlan, t: float):
    """Base and cluster rotation angles at time t, with exact integer
    winding reduction for rational plans (so t = period reproduces t = 0
    to the last bit)."""
    if plan.rational:
        p, q = plan.rational
        tau = t / plan.period
        base = 2.0 * math.pi * math.fmod(q * tau, 1.0)
        cl = [
            2.0 * math.pi * math.fmod((q + pj * p) * tau, 1.0) + th
            for pj, th in zip(plan.p_list, plan.phases)
        ]
    else:
        base = t
        cl = [w * t + th for w, th in zip(plan.omega, plan.phases)]
    return base, cl


def assemble_trajectory(family: CarouselFamily, plan: CarouselPlan, t: float) -> ClusterConfig:
    """Leading-order carousel configuration at time t."""
    base_angle, cluster_angles = _angles(plan, t)
    z0 = as_complex(family.base.positions) * np.exp(1j * base_angle)
    parts = []
    masses = []
    for j in range(1, family.index.n + 1):
        c = z0[j - 1]
        if j <= family.n0:
            cc = family.clusters[j - 1]
            zj = as_complex(cc.positions)
            parts.append(c + plan.radii[j - 1] * np.exp(1j * cluster_angles[j - 1]) * zj)
            masses.append(cc.masses)
        else:
            parts.append(np.array([c]))
            masses.append(np.array([family.base.masses[j - 1]]))
    z = np.concatenate(parts)
    return ClusterConfig(np.stack([z.real, z.imag], axis=-1), np.concatenate(masses), family.index)


def assemble_velocity(family: CarouselFamily, plan: CarouselPlan, t: float) -> np.ndarray:
    """Time derivative of the leading-order orbit (constant u)."""
    base_angle, cluster_angles = _angles(plan, t)
    z0dot = 1j * as_complex(family.base.positions) * np.exp(1j * base_angle)
    parts = []
    for j in range(1, family.index.n + 1):
        c = z0dot[j - 1]
        if j <= family.n0:
            cc = family.clusters[j - 1]
            zj = as_complex(cc.positions)
            w = plan.omega[j - 1]
            parts.append(c + plan.radii[j - 1] * w * 1j * np.exp(1j * cluster_angles[j - 1]) * zj)
        else:
            parts.append(np.array([c]))
    z = np.concatenate(parts)
    return np.stack([z.real, z.imag], axis=-1)


def assemble_positions(family: CarouselFamily, plan: CarouselPlan, ts) -> np.ndarray:
    """Vectorized positions, shape (len(ts), N, 2)."""
    out = np.empty((len(ts), family.index.total, 2))
    for i, t in enumerate(ts):
        out[i] = assemble_trajectory(family, plan, float(t)).positions
    return out


# ---------------------------------------------------------------------------
# phase scan
# ---------------------------------------------------------------------------


def coupling_average(family: CarouselFamily, plan: CarouselPlan, phases, n_nodes: int = 256) -> float:
    """Time average over one period of the coupling integrand h at the
    leading-order path u_0 = a_0, u_{j,k} = exp(i theta_j) a_{j,k}:

        h(s) = sum_{j<j'} sum_{k,k'} m m' [phi(|D + r_j e^{i p_j s} w_{j,k}
                - r_j' e^{i p_j' s} w_{j',k'}|) - phi(|D|)].
    """
    if not plan.rational:
        raise ValueError("phase averaging requires a rational plan")
    a = plan.alpha.value
    n = family.n
    n0 = family.n0
    z0 = as_complex(family.base.positions)
    s = np.arange(n_nodes) * (2.0 * math.pi / n_nodes)
    rotors = [np.exp(1j * plan.p_list[j] * s) for j in range(n0)]
    w = [np.exp(1j * phases[j]) * as_complex(family.clusters[j].positions) for j in range(n0)]
    total = np.zeros(n_nodes)
    for j in range(1, n + 1):
        for jp in range(j + 1, n + 1):
            D = z0[j - 1] - z0[jp - 1]
            base = abs(D)
            mj = family.clusters[j - 1].masses if j <= n0 else np.array([family.base.masses[j - 1]])
            mjp = family.clusters[jp - 1].masses if jp <= n0 else np.array([family.base.masses[jp - 1]])
            for k in range(len(mj)):
                zk = plan.radii[j - 1] * rotors[j - 1] * w[j - 1][k] if j <= n0 else 0.0
                for kp in range(len(mjp)):
                    zkp = plan.radii[jp - 1] * rotors[jp - 1] * w[jp - 1][kp] if jp <= n0 else 0.0
                    d = np.abs(D + zk - zkp)
                    if a == 1.0:
                        vals = -np.log(d) + math.log(base)
                    elif a == 2.0:
                        vals = 1.0 / d - 1.0 / base
                    else:
                        vals = (d ** (1.0 - a) - base ** (1.0 - a)) / (a - 1.0)
                    total += mj[k] * mjp[kp] * vals
    return float(total.mean())


@dataclass(frozen=True)
class PhaseScan:
    """Grid scan of the leading coupling average over cluster phases."""

    phases: np.ndarray  # (grid, n0) phase tuples
    values: np.ndarray
    extrema: list  # (phases tuple, value, 'min'|'max')
    flat: bool
    symmetry: tuple
    note: str = ""


def phase_scan(family: CarouselFamily, plan: CarouselPlan, grid_size: int = 32, n_nodes: int = 256) -> PhaseScan:
    """Scan theta in prod_j [0, 2 pi / sym_j) and locate extremal phases.

    For a single cluster the scan is analytically constant: a shift of
    theta_1 equals a time translation composed with a global rotation,
    both exact symmetries of the action, so every phase is critical.  In
    that case the scan reports flat=True and returns two representative
    candidate phases.
    """
    n0 = family.n0
    sym = tuple(
        rotation_symmetry_order(family.clusters[j].positions, family.clusters[j].masses)
        for j in range(n0)
    )
    axes = [np.arange(grid_size) * (2.0 * math.pi / s / grid_size) for s in sym]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    vals = np.array([coupling_average(family, plan, tuple(pt), n_nodes) for pt in pts])

    scale = max(abs(vals).max(), 1e-300)
    flat = (vals.max() - vals.min()) < 1e-10 * scale
    extrema = []
    note = ""
    if flat:
        note = (
            "coupling average constant over the scanned phases to within "
            f"{vals.max() - vals.min():.3e} (phase circle is a symmetry orbit); "
            "returning representative candidates"
        )
        reps = [tuple(0.0 for _ in range(n0))]
        reps.append(tuple(math.pi / (2.0 * s) for s in sym))
        for r in reps:
            extrema.append((r, float(vals[0]), "flat"))
    else:
        shape = (grid_size,) * n0
        grid_vals = vals.reshape(shape)
        for idx in np.ndindex(shape):
            v = grid_vals[idx]
            neigh = []
            for ax in range(n0):
                for d in (-1, 1):
                    nidx = list(idx)
                    nidx[ax] = (nidx[ax] + d) % grid_size
                    neigh.append(grid_vals[tuple(nidx)])
            if all(v <= u for u in neigh) and any(v < u for u in neigh):
                extrema.append((tuple(pts[np.ravel_multi_index(idx, shape)]), float(v), "min"))
            elif all(v >= u for u in neigh) and any(v > u for u in neigh):
                extrema.append((tuple(pts[np.ravel_multi_index(idx, shape)]), float(v), "max"))
    return PhaseScan(pts, vals, extrema, flat, sym, note)
