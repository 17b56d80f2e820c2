"""Direct N-body dynamics and orbit diagnostics.

Equations of motion (per unit mass):

    qdd_i = -sum_{j != i} m_j (q_i - q_j) / |q_i - q_j|^(alpha+1),

integrated with an adaptive 8th-order embedded pair (DOP853) with dense
output and a collision guard.  The invariant ledger tracks kinetic minus
potential energy K - U with U = sum_{i<j} m_i m_j phi_alpha(r_ij) (the
conserved combination under this sign convention), angular momentum
sum m <qdot, Jq>, linear momentum, and the center of mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import backends
from .carousel import CarouselPlan
from .core import Alpha, ClusterIndex, CollisionError, ConvergenceError, phi

__all__ = [
    "PhaseState",
    "Trajectory",
    "WindingNumbers",
    "rhs",
    "invariants_of",
    "integrate",
    "periodicity_defect",
    "winding_numbers",
]


@dataclass(frozen=True)
class PhaseState:
    positions: np.ndarray  # (N, 2)
    velocities: np.ndarray  # (N, 2)
    time: float = 0.0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        vel = np.array(self.velocities, dtype=float)
        if pos.shape != vel.shape or pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions and velocities must both be (N, 2)")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("state entries must be finite")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    @property
    def n_bodies(self) -> int:
        return self.positions.shape[0]

    def pack(self) -> np.ndarray:
        return np.concatenate([self.positions.ravel(), self.velocities.ravel()])

    @classmethod
    def unpack(cls, y, t=0.0) -> "PhaseState":
        n = len(y) // 4
        return cls(y[: 2 * n].reshape(n, 2), y[2 * n :].reshape(n, 2), t)


def rhs(state: PhaseState, masses, alpha) -> np.ndarray:
    """Accelerations at the given state; O(N^2) symmetric pair loop."""
    a = alpha.value if isinstance(alpha, Alpha) else float(alpha)
    pos = state.positions
    scale = float(np.abs(pos).max())
    dmin = backends.min_pair_dist(pos)
    if dmin < 1e-12 * max(scale, 1.0):
        raise CollisionError(f"collision at t={state.time:g}: min pair distance {dmin:.3e}")
    return backends.accel(pos, masses, a)


def invariants_of(state: PhaseState, masses, alpha):
    """(energy K - U, angular momentum, linear momentum, center of mass)."""
    a = alpha.value if isinstance(alpha, Alpha) else float(alpha)
    m = np.asarray(masses, dtype=float)
    q, v = state.positions, state.velocities
    kin = 0.5 * float(np.sum(m * np.einsum("ij,ij->i", v, v)))
    pot = 0.0
    n = len(m)
    for i in range(n):
        for j in range(i + 1, n):
            pot += m[i] * m[j] * phi(float(np.hypot(*(q[i] - q[j]))), a)
    ang = float(np.sum(m * (q[:, 0] * v[:, 1] - q[:, 1] * v[:, 0])))
    lin = (m[:, None] * v).sum(axis=0)
    com = (m[:, None] * q).sum(axis=0) / m.sum()
    return kin - pot, ang, lin, com


@dataclass
class Trajectory:
    """Sampled solution with dense interpolation and an invariant ledger."""

    times: np.ndarray
    states: np.ndarray  # (n_samples, 4N)
    masses: np.ndarray
    alpha: Alpha
    index: ClusterIndex | None = None
    energy: np.ndarray | None = None
    angular_momentum: np.ndarray | None = None
    linear_momentum: np.ndarray | None = None
    com: np.ndarray | None = None
    _sol = None

    def __post_init__(self):
        dt = np.diff(self.times)
        if len(dt) and not (np.all(dt > 0) or np.all(dt < 0)):
            raise ValueError("sample times must be strictly monotone")
        if self.energy is not None and len(self.energy) != len(self.times):
            raise ValueError("invariant ledger length must match samples")

    def state_at(self, t: float) -> PhaseState:
        if self._sol is not None:
            return PhaseState.unpack(self._sol(t), t)
        i = int(np.searchsorted(self.times, t))
        i = min(max(i, 0), len(self.times) - 1)
        return PhaseState.unpack(self.states[i], self.times[i])

    def drift(self) -> dict:
        """Relative invariant drift over the ledger."""
        e0 = self.energy[0]
        a0 = self.angular_momentum[0]
        return {
            "energy": float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1.0)),
            "angular_momentum": float(np.max(np.abs(self.angular_momentum - a0)) / max(abs(a0), 1.0)),
            "linear_momentum": float(np.max(np.abs(self.linear_momentum - self.linear_momentum[0]))),
        }


def integrate(
    state0: PhaseState,
    masses,
    alpha,
    t_end: float,
    rtol: float = 1e-12,
    atol: float = 1e-14,
    t_eval=None,
    index: ClusterIndex | None = None,
    max_step: float = math.inf,
    first_step: float | None = None,
    n_samples: int = 200,
) -> Trajectory:
    """Adaptive DOP853 integration with dense output and collision guard."""
    alpha = Alpha.parse(alpha)
    a = alpha.value
    m = np.asarray(masses, dtype=float)
    y0 = state0.pack()
    n = state0.n_bodies
    if n > 1:
        pos0 = state0.positions
        diam0 = 2.0 * float(np.max(np.linalg.norm(pos0 - pos0.mean(axis=0), axis=1)))
        guard = 1e-8 * diam0
    else:
        guard = 0.0

    def fun(t, y):
        pos = y[: 2 * n].reshape(n, 2)
        acc = backends.accel(pos, m, a)
        return np.concatenate([y[2 * n :], acc.ravel()])

    def too_close(t, y):
        pos = y[: 2 * n].reshape(n, 2)
        return backends.min_pair_dist(pos) - guard

    too_close.terminal = True
    too_close.direction = -1

    if t_eval is None:
        t_eval = np.linspace(state0.time, t_end, n_samples)
    kwargs = dict(method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=too_close if n > 1 else None, max_step=max_step)
    if first_step is not None:
        kwargs["first_step"] = first_step
    sol = solve_ivp(fun, (state0.time, t_end), y0, t_eval=np.asarray(t_eval, dtype=float), **kwargs)
    if sol.status == 1:
        t_ev = sol.t_events[0][0]
        raise CollisionError(f"close encounter at t = {t_ev:g} (guard {guard:.3e})")
    if not sol.success:
        raise ConvergenceError(f"integrator failed: {sol.message}")

    times = sol.t
    states = sol.y.T.copy()
    energy = np.empty(len(times))
    ang = np.empty(len(times))
    lin = np.empty((len(times), 2))
    com = np.empty((len(times), 2))
    for i, (t, y) in enumerate(zip(times, states)):
        e, l, pmom, c = invariants_of(PhaseState.unpack(y, t), m, a)
        energy[i] = e
        ang[i] = l
        lin[i] = pmom
        com[i] = c
    traj = Trajectory(times, states, m, alpha, index, energy, ang, lin, com)
    traj._sol = sol.sol
    return traj


def periodicity_defect(traj: Trajectory, T: float) -> float:
    """Mass-weighted sup-norm difference between the states at t = t0 and
    t = t0 + T (positions and velocities)."""
    t0 = traj.times[0]
    if traj.times[-1] < t0 + T - 1e-12:
        raise ValueError("trajectory does not span one period")
    y0 = traj.state_at(t0)
    y1 = traj.state_at(t0 + T)
    w = np.repeat(traj.masses, 2)
    dq = np.abs((y1.positions - y0.positions).ravel()) * w
    dv = np.abs((y1.velocities - y0.velocities).ravel()) * w
    return float(max(dq.max(), dv.max()))


@dataclass(frozen=True)
class WindingNumbers:
    base: int
    clusters: tuple  # winding of each k_j > 1 cluster about its center
    residual: float  # worst distance of raw winding to the nearest integer (turns)


def _unwrap_turns(z: np.ndarray) -> float:
    """Net turns of a complex path about 0 by angle unwrapping."""
    if np.any(np.abs(z) == 0.0):
        raise ValueError("path passes through the origin; winding undefined")
    ang = np.unwrap(np.angle(z))
    return (ang[-1] - ang[0]) / (2.0 * math.pi)


def winding_numbers(traj: Trajectory, plan: CarouselPlan) -> WindingNumbers:
    """Winding of cluster centers about the origin and of each cluster's
    first member about its center, over one period of a rational plan."""
    if traj.index is None:
        raise ValueError("trajectory carries no cluster index")
    if not plan.rational:
        raise ValueError("winding numbers require a rational plan")
    idx = traj.index
    T = plan.period
    expect = max(abs(plan.winding_base), max(abs(plan.winding_cluster(j)) for j in range(1, plan.n0 + 1)))
    n_s = min(max(64 * (expect + 1), 512), 200_000)
    ts = traj.times[0] + np.linspace(0.0, T, n_s)
    ys = np.array([traj.state_at(t).positions for t in ts])  # (n_s, N, 2)
    z = ys[..., 0] + 1j * ys[..., 1]

    m = traj.masses
    residual = 0.0
    base_turns = []
    for j in range(1, idx.n + 1):
        sl = idx.cluster_slice(j)
        mj = m[sl]
        center = (z[:, sl] * mj).sum(axis=1) / mj.sum()
        turns = _unwrap_turns(center)
        base_turns.append(turns)
        residual = max(residual, abs(turns - round(turns)))
    base = int(round(float(np.mean([round(t) for t in base_turns]))))

    cluster_windings = []
    for j in range(1, idx.n0 + 1):
        sl = idx.cluster_slice(j)
        mj = m[sl]
        center = (z[:, sl] * mj).sum(axis=1) / mj.sum()
        rel = z[:, sl.start] - center
        turns = _unwrap_turns(rel)
        cluster_windings.append(int(round(turns)))
        residual = max(residual, abs(turns - round(turns)))
    if residual > 0.01:
        raise ValueError(f"ambiguous angle unwrapping: residual {residual:.3f} turns")
    return WindingNumbers(base, tuple(cluster_windings), float(residual))
