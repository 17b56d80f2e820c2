"""Amended potential, central-configuration Newton solver, and closed-form
generators (regular polygon, Lagrange triangle, two-body).

A planar configuration u with masses m is a central configuration of
frequency one when it is a critical point of the amended potential

    V(u) = 1/2 ||M^(1/2) u||^2 + sum_{i<j} m_i m_j phi_alpha(|u_i - u_j|),

equivalently M u = F(u) with F the pairwise attraction sum.  Rigid
rotation of such a configuration at unit angular speed solves the N-body
equations of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Alpha,
    CollisionError,
    ConvergenceError,
    DegenerateConfigError,
    phi,
    rot,
)

__all__ = [
    "CentralConfiguration",
    "AmendedPotentialEval",
    "amended_potential",
    "solve_central_config",
    "polygon_config",
    "lagrange_config",
    "binary_config",
    "mass_beta",
    "rotation_mode",
    "rotation_symmetry_order",
]

COLLISION_RTOL = 1e-12


@dataclass(frozen=True)
class AmendedPotentialEval:
    """Value / gradient / Hessian of the amended potential at one point."""

    value: float
    gradient: np.ndarray | None = None
    hessian: np.ndarray | None = None


@dataclass(frozen=True)
class CentralConfiguration:
    positions: np.ndarray  # (k, 2)
    masses: np.ndarray  # (k,)
    alpha: Alpha
    residual: float

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        m = np.array(self.masses, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] != m.shape[0]:
            raise ValueError("positions must be (k, 2) matching masses (k,)")
        if not np.all(m > 0):
            raise ValueError("masses must be strictly positive")
        pos.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", m)

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


def _check_collisions(pos, scale=None):
    n = len(pos)
    if n < 2:
        return
    d = pos[:, None, :] - pos[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    iu = np.triu_indices(n, k=1)
    vals = r[iu]
    if scale is None:
        scale = max(float(vals.max()), 1.0)
    amin = int(np.argmin(vals))
    if vals[amin] < COLLISION_RTOL * scale:
        pair = (int(iu[0][amin]), int(iu[1][amin]))
        raise CollisionError(f"bodies {pair} at distance {vals[amin]:.3e}", pair=pair)


def amended_potential(positions, masses, alpha, order: int = 2) -> AmendedPotentialEval:
    """Evaluate V and, for order >= 1/2, its analytic gradient/Hessian.

    The Hessian is assembled from the pairwise blocks
    -r^-(alpha+1) I + (alpha+1) r^-(alpha+3) d d^T (times the mass
    product) plus the mass matrix on the diagonal; it is exactly
    symmetric by construction.
    """
    a = alpha.value if isinstance(alpha, Alpha) else float(alpha)
    u = np.asarray(positions, dtype=float)
    m = np.asarray(masses, dtype=float)
    k = len(m)
    _check_collisions(u)

    value = 0.5 * float(np.sum(m * np.einsum("ij,ij->i", u, u)))
    grad = m[:, None] * u if order >= 1 else None
    hess = None
    if order >= 2:
        hess = np.zeros((2 * k, 2 * k))
        for i in range(k):
            hess[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] += m[i] * np.eye(2)

    for i in range(k):
        for j in range(i + 1, k):
            d = u[i] - u[j]
            r = math.hypot(d[0], d[1])
            mm = m[i] * m[j]
            value += mm * phi(r, a)
            if order >= 1:
                f = mm * r ** (-(a + 1.0)) * d
                grad[i] -= f
                grad[j] += f
            if order >= 2:
                blk = mm * (
                    -(r ** (-(a + 1.0))) * np.eye(2)
                    + (a + 1.0) * r ** (-(a + 3.0)) * np.outer(d, d)
                )
                hess[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] += blk
                hess[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] += blk
                hess[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] -= blk
                hess[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] -= blk

    return AmendedPotentialEval(
        value=value,
        gradient=None if grad is None else grad.reshape(-1),
        hessian=hess,
    )


def rotation_mode(positions) -> np.ndarray:
    """Flattened tangent J u of the rotation orbit through u."""
    u = np.asarray(positions, dtype=float)
    return np.stack([-u[:, 1], u[:, 0]], axis=1).reshape(-1)


def solve_central_config(initial, masses, alpha, tol: float = 1e-12, max_iter: int = 60) -> CentralConfiguration:
    """Newton iteration on grad V with the rotational phase fixed.

    Critical points of V automatically have zero weighted center of mass,
    so only the rotation null mode needs a constraint; the linear slice
    <u, J a_guess> = 0 is appended as a bordered row/column.
    """
    alpha = Alpha.parse(alpha)
    m = np.asarray(masses, dtype=float)
    u = np.array(initial, dtype=float)
    k = len(m)
    if u.shape != (k, 2):
        raise ValueError("initial guess must be (k, 2)")
    total = m.sum()
    u -= (m[:, None] * u).sum(axis=0) / total
    c = rotation_mode(u)
    nc = np.linalg.norm(c)
    if nc == 0.0:
        raise DegenerateConfigError("initial guess has no rotational direction")
    c = c / nc

    ev = amended_potential(u, m, alpha, order=1)
    g = ev.gradient
    gnorm = np.linalg.norm(g)
    for _ in range(max_iter):
        if gnorm < tol:
            break
        ev = amended_potential(u, m, alpha, order=2)
        n = 2 * k + 1
        A = np.zeros((n, n))
        A[: 2 * k, : 2 * k] = ev.hessian
        A[: 2 * k, -1] = c
        A[-1, : 2 * k] = c
        rhs = np.zeros(n)
        rhs[: 2 * k] = -ev.gradient
        rhs[-1] = -float(u.reshape(-1) @ c)
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise DegenerateConfigError(f"singular bordered Newton system: {exc}") from exc
        if not np.all(np.isfinite(sol)):
            raise DegenerateConfigError("non-finite Newton step (degenerate configuration)")
        step = sol[: 2 * k].reshape(k, 2)
        lam = 1.0
        for _ in range(30):
            trial = u + lam * step
            try:
                gnew = amended_potential(trial, m, alpha, order=1).gradient
            except CollisionError:
                lam *= 0.5
                continue
            if np.linalg.norm(gnew) < gnorm or lam < 1e-6:
                break
            lam *= 0.5
        u = u + lam * step
        g = amended_potential(u, m, alpha, order=1).gradient
        gnorm = np.linalg.norm(g)
    else:
        raise ConvergenceError(f"no convergence after {max_iter} Newton steps (|grad| = {gnorm:.3e})")

    u -= (m[:, None] * u).sum(axis=0) / total
    gnorm = float(np.linalg.norm(amended_potential(u, m, alpha, order=1).gradient))
    return CentralConfiguration(u, m, alpha, gnorm)


def _s1(k: int, a: float) -> float:
    if a == 1.0:
        return (k - 1) / 2.0
    tot = 0.0
    for j in range(1, k):
        tot += math.sin(j * math.pi / k) ** (-(a - 1.0))
    return 2.0 ** (-a) * tot


def polygon_config(k: int, alpha, mass: float = 1.0) -> CentralConfiguration:
    """Regular k-gon of equal masses, scaled to frequency one.

    Radius (mass * s_1)^(1/(alpha+1)) with
    s_1 = 2^-alpha sum_j sin^(1-alpha)(j pi / k).
    """
    if k < 2:
        raise ValueError("polygon needs k >= 2")
    alpha = Alpha.parse(alpha)
    a = alpha.value
    radius = (mass * _s1(k, a)) ** (1.0 / (a + 1.0))
    zeta = 2.0 * math.pi / k
    pos = np.array([rot(j * zeta) @ np.array([radius, 0.0]) for j in range(1, k + 1)])
    m = np.full(k, float(mass))
    res = float(np.linalg.norm(amended_potential(pos, m, alpha, order=1).gradient))
    return CentralConfiguration(pos, m, alpha, res)


def lagrange_config(m1: float, m2: float, m3: float, alpha) -> CentralConfiguration:
    """Equilateral triangle scaled to frequency one and centered by mass.

    The side length solves (m1 + m2 + m3) s^-(alpha+1) = 1.
    """
    alpha = Alpha.parse(alpha)
    m = np.array([m1, m2, m3], dtype=float)
    if np.any(m <= 0):
        raise ValueError("masses must be positive")
    side = m.sum() ** (1.0 / (alpha.value + 1.0))
    circ = side / math.sqrt(3.0)
    angles = [math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3]
    pos = np.array([[circ * math.cos(t), circ * math.sin(t)] for t in angles])
    pos -= (m[:, None] * pos).sum(axis=0) / m.sum()
    res = float(np.linalg.norm(amended_potential(pos, m, alpha, order=1).gradient))
    return CentralConfiguration(pos, m, alpha, res)


def binary_config(m1: float, m2: float, alpha) -> CentralConfiguration:
    """Two bodies on the x-axis, separation (m1 + m2)^(1/(alpha+1)).

    This is the circular Kepler pair of frequency one: with w the relative
    position, mu w = m1 m2 w / |w|^(alpha+1) fixes |w|^(alpha+1) = m1 + m2.
    """
    alpha = Alpha.parse(alpha)
    if m1 <= 0 or m2 <= 0:
        raise ValueError("masses must be positive")
    M = m1 + m2
    w = M ** (1.0 / (alpha.value + 1.0))
    pos = np.array([[m2 / M * w, 0.0], [-m1 / M * w, 0.0]])
    m = np.array([m1, m2], dtype=float)
    res = float(np.linalg.norm(amended_potential(pos, m, alpha, order=1).gradient))
    return CentralConfiguration(pos, m, alpha, res)


def mass_beta(m1: float, m2: float, m3: float) -> float:
    """Normalized symmetric mass product
    27 (m1 m2 + m1 m3 + m2 m3) / (m1 + m2 + m3)^2; equals 9 iff the
    masses are equal and never exceeds 9."""
    if m1 <= 0 or m2 <= 0 or m3 <= 0:
        raise ValueError("masses must be positive")
    return 27.0 * (m1 * m2 + m1 * m3 + m2 * m3) / (m1 + m2 + m3) ** 2


def rotation_symmetry_order(positions, masses, tol: float = 1e-9) -> int:
    """Largest m such that rotation by 2 pi / m permutes the configuration
    onto itself with matching masses (1 when there is no such symmetry)."""
    pos = np.asarray(positions, dtype=float)
    m = np.asarray(masses, dtype=float)
    k = len(m)
    scale = max(np.abs(pos).max(), 1.0)
    for order in range(k, 1, -1):
        R = rot(2.0 * math.pi / order)
        rotated = pos @ R.T
        used = set()
        ok = True
        for i in range(k):
            found = False
            for j in range(k):
                if j in used:
                    continue
                if abs(m[i] - m[j]) <= tol and np.linalg.norm(rotated[i] - pos[j]) <= tol * scale:
                    used.add(j)
                    found = True
                    break
            if not found:
                ok = False
                break
        if ok:
            return order
    return 1
