"""Shared domain types, the power-law potential family, and planar algebra.

All motion takes place in the plane E = R^2.  Positions are stored as
float arrays of shape (..., 2); hot numeric paths may also carry a point
as the complex number x + iy, in which case the complex structure J acts
as multiplication by 1j.  Bodies are grouped into clusters and addressed
by a 1-based multi-index (j, k): cluster j, member k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "Alpha",
    "ClusterIndex",
    "ClusterConfig",
    "CollisionError",
    "ConvergenceError",
    "DegenerateConfigError",
    "InfeasiblePlanError",
    "I2",
    "R2",
    "J2",
    "IJ2",
    "rot",
    "phi",
    "dphi",
    "center_of_mass_project",
    "multi_index",
    "flat_index",
    "as_complex",
    "as_real",
]


class CollisionError(RuntimeError):
    """Two bodies got closer than the collision threshold."""

    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations."""


class DegenerateConfigError(RuntimeError):
    """A Newton system was singular beyond the expected rotational mode."""


class InfeasiblePlanError(ValueError):
    """Requested carousel parameters violate 1 + p_j * nu > 0."""


# 2x2 generators on E^C.  J is the complex structure (rotation by +pi/2),
# R the reflection diag(1, -1); they satisfy J^2 = -I, R^2 = I, JR = -RJ.
I2 = np.eye(2, dtype=complex)
R2 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
J2 = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
IJ2 = 1j * J2


def rot(theta: float) -> np.ndarray:
    """Real rotation matrix exp(theta * J)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def as_complex(points) -> np.ndarray:
    """View planar points (..., 2) as complex numbers x + iy."""
    pts = np.asarray(points, dtype=float)
    return pts[..., 0] + 1j * pts[..., 1]


def as_real(z) -> np.ndarray:
    """Inverse of :func:`as_complex`: complex array -> (..., 2) floats."""
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1)


@dataclass(frozen=True)
class Alpha:
    """Homogeneity exponent of the force law, phi'(r) = -r**(-alpha).

    alpha = 2 is the Newtonian (gravitational) case, alpha = 1 the
    logarithmic (vortex-filament) case.  An exact rational value can be
    attached so that rationality tests (e.g. whether sqrt(3 - alpha) is
    rational) are decidable; plain floats fall back to tolerance checks.
    """

    value: float
    exact: Fraction | None = field(default=None)

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 1.0:
            raise ValueError(f"alpha must be a finite real >= 1, got {self.value}")
        if self.exact is not None and float(self.exact) != self.value:
            raise ValueError("exact rational does not match float value")

    @property
    def is_logarithmic(self) -> bool:
        return self.value == 1.0

    @property
    def is_gravitational(self) -> bool:
        return self.value == 2.0

    @classmethod
    def parse(cls, text) -> "Alpha":
        """Accept a float, a Fraction, 'num/den', or the tags 'log'/'newton'."""
        if isinstance(text, Alpha):
            return text
        if isinstance(text, Fraction):
            return cls(float(text), exact=text)
        if isinstance(text, (int, float)):
            v = float(text)
            frac = Fraction(v).limit_denominator(10**6)
            exact = frac if float(frac) == v else None
            return cls(v, exact=exact)
        s = str(text).strip().lower()
        if s in ("log", "logarithmic"):
            return cls(1.0, exact=Fraction(1))
        if s in ("newton", "newtonian", "grav", "gravitational"):
            return cls(2.0, exact=Fraction(2))
        if "/" in s:
            frac = Fraction(s)
            return cls(float(frac), exact=frac)
        v = float(s)
        frac = Fraction(v).limit_denominator(10**6)
        exact = frac if float(frac) == v else None
        return cls(v, exact=exact)

    def __float__(self):
        return self.value


def _alpha_value(alpha) -> float:
    return alpha.value if isinstance(alpha, Alpha) else float(alpha)


def phi(r: float, alpha) -> float:
    """Potential kernel with phi'(r) = -r**(-alpha).

    phi_2(r) = 1/r (Newtonian), phi_1(r) = -ln r (logarithmic), and for
    general alpha > 1 the branch r**(1-alpha)/(alpha-1), normalized so
    that phi -> 0 at infinity.
    """
    a = _alpha_value(alpha)
    if r <= 0.0:
        raise ValueError(f"phi requires r > 0, got r={r}")
    if a == 1.0:
        return -math.log(r)
    if a == 2.0:
        return 1.0 / r
    return r ** (1.0 - a) / (a - 1.0)


def dphi(r: float, alpha) -> float:
    """Derivative phi'(r) = -r**(-alpha)."""
    a = _alpha_value(alpha)
    if r <= 0.0:
        raise ValueError(f"dphi requires r > 0, got r={r}")
    return -(r ** (-a))


@dataclass(frozen=True)
class ClusterIndex:
    """Cluster sizes k_1..k_n with the convention that the n0 clusters of
    size > 1 come first and the remaining clusters are single bodies."""

    cluster_sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.cluster_sizes)
        object.__setattr__(self, "cluster_sizes", sizes)
        if not sizes or any(k < 1 for k in sizes):
            raise ValueError("cluster sizes must be positive integers")
        n0 = self.n0
        if any(k > 1 for k in sizes[n0:]):
            raise ValueError("clusters with k_j > 1 must precede the single bodies")

    @property
    def n(self) -> int:
        return len(self.cluster_sizes)

    @property
    def n0(self) -> int:
        return sum(1 for k in self.cluster_sizes if k > 1)

    @property
    def total(self) -> int:
        return sum(self.cluster_sizes)

    def offset(self, j: int) -> int:
        """Flat offset of the first member of cluster j (1-based j)."""
        if not 1 <= j <= self.n:
            raise IndexError(f"cluster index {j} out of range 1..{self.n}")
        return sum(self.cluster_sizes[: j - 1])

    def cluster_slice(self, j: int) -> slice:
        off = self.offset(j)
        return slice(off, off + self.cluster_sizes[j - 1])


def multi_index(flat: int, idx: ClusterIndex):
    """Flat body index -> 1-based (cluster j, member k)."""
    if not 0 <= flat < idx.total:
        raise IndexError(f"flat index {flat} out of range 0..{idx.total - 1}")
    for j, kj in enumerate(idx.cluster_sizes, start=1):
        if flat < kj:
            return j, flat + 1
        flat -= kj
    raise AssertionError("unreachable")


def flat_index(j: int, k: int, idx: ClusterIndex) -> int:
    """1-based (cluster j, member k) -> flat body index."""
    if not 1 <= j <= idx.n:
        raise IndexError(f"cluster index {j} out of range 1..{idx.n}")
    if not 1 <= k <= idx.cluster_sizes[j - 1]:
        raise IndexError(f"member index {k} out of range in cluster {j}")
    return idx.offset(j) + (k - 1)


@dataclass(frozen=True)
class ClusterConfig:
    """Positions and masses of N bodies in the (j, k) cluster addressing.

    Immutable: arrays are copied in and marked read-only.
    """

    positions: np.ndarray
    masses: np.ndarray
    index: ClusterIndex

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        m = np.array(self.masses, dtype=float)
        if pos.shape != (self.index.total, 2):
            raise ValueError(f"positions must have shape ({self.index.total}, 2)")
        if m.shape != (self.index.total,):
            raise ValueError(f"masses must have shape ({self.index.total},)")
        if not np.all(m > 0):
            raise ValueError("masses must be strictly positive")
        pos.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", m)

    @property
    def n_bodies(self) -> int:
        return self.index.total

    def cluster_positions(self, j: int) -> np.ndarray:
        return self.positions[self.index.cluster_slice(j)]

    def cluster_masses(self, j: int) -> np.ndarray:
        return self.masses[self.index.cluster_slice(j)]

    def cluster_mass(self, j: int) -> float:
        """Total mass M_j of cluster j."""
        return float(self.cluster_masses(j).sum())

    def cluster_center(self, j: int) -> np.ndarray:
        m = self.cluster_masses(j)
        return (m[:, None] * self.cluster_positions(j)).sum(axis=0) / m.sum()

    def centers(self) -> np.ndarray:
        return np.array([self.cluster_center(j) for j in range(1, self.index.n + 1)])

    def position(self, j: int, k: int) -> np.ndarray:
        return self.positions[flat_index(j, k, self.index)]


def center_of_mass_project(cfg: ClusterConfig) -> ClusterConfig:
    """Translate so the weighted center of mass sits at the origin.

    After projection the Jacobi decomposition q_{j,k} = Q_{0,j} + Q_{j,k}
    satisfies both reduction constraints: the relative blocks Q_{j,k} have
    zero weighted mean per cluster (true of any configuration by
    construction of the cluster centers) and the centers satisfy
    sum_j M_j Q_{0,j} = 0.  Idempotent.
    """
    total = cfg.masses.sum()
    com = (cfg.masses[:, None] * cfg.positions).sum(axis=0) / total
    return ClusterConfig(cfg.positions - com, cfg.masses, cfg.index)
