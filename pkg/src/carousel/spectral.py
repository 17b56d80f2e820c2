"""Spectral nondegeneracy machinery for central configurations.

For the regular k-gon with unit masses the Hessian of the amended
potential block-diagonalizes over the isotypic components of the cyclic
symmetry into 2x2 blocks B_j built from the coefficients

    s_j = 2^-alpha sum_{l=1}^{k-1} sin^2(j l zeta / 2) / sin^(alpha+1)(l zeta / 2),
    zeta = 2 pi / k,

and the periodic-action blocks are m_j(lambda) = lambda^2 I - 2 lambda iJ + B_j
with real determinant

    P_j(lambda) = ((lambda-1)^2 + a_j - g_j)((lambda+1)^2 + a_j + g_j) - b_j^2.

A central configuration is 2 pi p-nondegenerate when every block
m_j(l/p), l integer, is invertible apart from the single rotational zero
mode; the certifiers below decide this for polygons (floating sweep for
general alpha, rigorous interval sweep for the gravitational case), for
the Lagrange triangle (closed-form inequality), and for arbitrary solved
configurations (numeric singular-value sweep of the T-hat blocks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import backends
from .central_config import CentralConfiguration, amended_potential, mass_beta, rotation_mode
from .core import Alpha, I2, IJ2, J2, R2
from .interval import Interval, excludes_zero, iadd, idiv, imul, iscale, isub

__all__ = [
    "PolygonSpectrum",
    "CertResult",
    "s_coeff",
    "s_coeff_interval",
    "polygon_spectrum",
    "block_coeffs",
    "block_B",
    "block_m",
    "det_m",
    "block_eigs",
    "mu_kepler",
    "kepler_zero",
    "isotypic_basis",
    "reduced_basis",
    "hatT_block",
    "polygon_hatT_eigs",
    "certify_polygon_weak",
    "certify_polygon_grav",
    "certify_lagrange",
    "certify_a0",
    "certify_general",
]

NEAR_ZERO_TOL = 1e-9  # floating refutation threshold on |det|


# ---------------------------------------------------------------------------
# s coefficients
# ---------------------------------------------------------------------------


def s_coeff(k: int, j: int, alpha) -> float:
    """s_j by direct summation; exact integer/2 arithmetic at alpha = 1,
    where s_j = j (k - j) / 2."""
    if k < 2:
        raise ValueError("k >= 2 required")
    alpha = Alpha.parse(alpha)
    jr = j % k
    if alpha.is_logarithmic:
        return (jr * (k - jr)) / 2.0
    a = alpha.value
    tot = 0.0
    for l in range(1, k):
        num = math.sin(jr * l * math.pi / k) ** 2
        tot += num * math.sin(l * math.pi / k) ** (-(a + 1.0))
    return 2.0 ** (-a) * tot


def _s_iv_extended_one(k: int, j: int, alpha: Alpha):
    """1-ulp float enclosure of s_j via 40-digit evaluation."""
    from mpmath import mp, mpf
    from mpmath import pi as mp_pi
    from mpmath import sin as mp_sin
    from mpmath.libmp import to_float

    with mp.workdps(40):
        if alpha.exact is not None:
            a = mpf(alpha.exact.numerator) / alpha.exact.denominator
        else:
            a = mpf(alpha.value)
        jr = j % k
        tot = mpf(0)
        for l in range(1, k):
            m = (jr * l) % k
            if m == 0:
                continue
            tot += mp_sin(mp_pi * m / k) ** 2 * mp_sin(mp_pi * l / k) ** (-(a + 1))
        v = tot * mpf(2) ** (-a)
        lo = to_float(v._mpf_, rnd="d")
        hi = to_float(v._mpf_, rnd="u")
        # cover the (bounded, tiny) accumulated 40-digit rounding error
        err = abs(v) * mpf(10) ** (-30)
        if not mpf(lo) <= v - err:
            lo = math.nextafter(lo, -math.inf)
        if not mpf(hi) >= v + err:
            hi = math.nextafter(hi, math.inf)
    return Interval(lo, hi)


def s_coeff_interval(k: int, j: int, alpha, precision: str = "double") -> Interval:
    """Rigorous enclosure of s_j.

    'double' uses the outward-rounded kernel (width a few thousand ulps
    at k ~ 1000); 'extended' evaluates at 40 digits and returns a 1-ulp
    float enclosure.
    """
    alpha = Alpha.parse(alpha)
    if precision == "extended":
        return _s_iv_extended_one(k, j, alpha)
    lo, hi = backends.s_all_iv(k, alpha.value)
    jr = j % k
    return Interval(float(lo[jr]), float(hi[jr]))


def _s_array(k: int, alpha: Alpha) -> np.ndarray:
    if alpha.is_logarithmic:
        j = np.arange(k + 1, dtype=float)
        return j * (k - j) / 2.0
    return backends.s_all(k, alpha.value)


# ---------------------------------------------------------------------------
# normal-form blocks
# ---------------------------------------------------------------------------


def block_coeffs(k: int, j: int, alpha, s=None):
    """Coefficients (a_j, b_j, g_j) of B_j = (1 + a_j) I - b_j R - g_j iJ:

        a_j = (alpha-1)(s_{j+1} + s_{j-1}) / (4 s_1),
        b_j = (alpha+1)(s_j - s_1) / (2 s_1),
        g_j = (alpha-1)(s_{j+1} - s_{j-1}) / (4 s_1).
    """
    alpha = Alpha.parse(alpha)
    if not 1 <= j <= k:
        raise ValueError("block index j must satisfy 1 <= j <= k")
    if alpha.is_logarithmic:
        # a_j = g_j = 0 exactly; b_j = s_j / s_1 - 1 with s_j = j(k-j)/2
        bj = (j * (k - j) - (k - 1)) / (k - 1)
        return 0.0, float(bj), 0.0
    if s is None:
        s = _s_array(k, alpha)
    a = alpha.value
    s1 = s[1]
    sm = s[j - 1]
    sp = s[j + 1] if j < k else s[1]  # s is k-periodic
    aj = (a - 1.0) * (sp + sm) / (4.0 * s1)
    bj = (a + 1.0) * (s[j] - s1) / (2.0 * s1)
    gj = (a - 1.0) * (sp - sm) / (4.0 * s1)
    return float(aj), float(bj), float(gj)


def block_B(k: int, j: int, alpha, s=None) -> np.ndarray:
    """The 2x2 Hermitian isotypic block of the polygon Hessian."""
    aj, bj, gj = block_coeffs(k, j, alpha, s)
    return (1.0 + aj) * I2 - bj * R2 - gj * IJ2


def block_m(k: int, j: int, alpha, lam: float, s=None) -> np.ndarray:
    """m_j(lambda) = lambda^2 I - 2 lambda iJ + B_j."""
    return lam * lam * I2 - 2.0 * lam * IJ2 + block_B(k, j, alpha, s)


def det_m(k: int, j: int, alpha, lam: float, s=None) -> float:
    """Real determinant P_j(lambda) of m_j(lambda)."""
    aj, bj, gj = block_coeffs(k, j, alpha, s)
    return _det_from_coeffs(aj, bj, gj, lam)


def _det_from_coeffs(aj: float, bj: float, gj: float, lam: float) -> float:
    return ((lam - 1.0) ** 2 + aj - gj) * ((lam + 1.0) ** 2 + aj + gj) - bj * bj


def block_eigs(k: int, j: int, alpha, lam: float, s=None):
    """Eigenvalues of the Hermitian block m_j(lambda):
    lambda^2 + 1 + a_j -+ sqrt(b_j^2 + (2 lambda + g_j)^2)."""
    aj, bj, gj = block_coeffs(k, j, alpha, s)
    A = lam * lam + 1.0 + aj
    rad = math.sqrt(bj * bj + (2.0 * lam + gj) ** 2)
    return A - rad, A + rad


def mu_kepler(alpha, lam: float):
    """Eigenvalues mu-+ of the j = k (Kepler/homographic) block:
    (alpha+1)/2 + lambda^2 -+ sqrt((alpha+1)^2 + 16 lambda^2)/2."""
    a = Alpha.parse(alpha).value
    rad = 0.5 * math.sqrt((a + 1.0) ** 2 + 16.0 * lam * lam)
    base = 0.5 * (a + 1.0) + lam * lam
    return base - rad, base + rad


def kepler_zero(alpha) -> float:
    """The unique positive zero sqrt(3 - alpha) of mu_k^-; requires alpha < 3."""
    a = Alpha.parse(alpha).value
    if a >= 3.0:
        raise ValueError("mu_k^- has no positive zero for alpha >= 3")
    return math.sqrt(3.0 - a)


@dataclass(frozen=True)
class PolygonSpectrum:
    """s coefficients and isotypic blocks of the unit-mass k-gon."""

    k: int
    alpha: Alpha
    s: np.ndarray  # s_0 .. s_k
    blocks: tuple  # B_1 .. B_k

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "s", s)


def polygon_spectrum(k: int, alpha) -> PolygonSpectrum:
    alpha = Alpha.parse(alpha)
    s = _s_array(k, alpha)
    blocks = tuple(block_B(k, j, alpha, s) for j in range(1, k + 1))
    return PolygonSpectrum(k, alpha, s, blocks)


# ---------------------------------------------------------------------------
# certification results
# ---------------------------------------------------------------------------


@dataclass
class CertResult:
    """Outcome of a nondegeneracy check.

    verdict: 'certified' | 'refuted' | 'inconclusive'.
    failing_modes: (block j, integer l) pairs with vanishing determinant
    (refuted) or with enclosures straddling zero (inconclusive).
    margin: minimum |det| over the sweep, or the rigorous interval lower
    bound in interval mode.
    """

    target: str
    verdict: str
    margin: float
    failing_modes: list = field(default_factory=list)
    modes_checked: int = 0
    interval: bool = False
    conditions_log: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == "certified" and self.failing_modes:
            raise ValueError("certified result cannot carry failing modes")
        if self.verdict == "refuted" and not self.failing_modes:
            raise ValueError("refuted result must record a failing mode")

    @property
    def ok(self) -> bool:
        return self.verdict == "certified"

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "verdict": self.verdict,
            "margin": self.margin,
            "failing_modes": [list(m) for m in self.failing_modes],
            "modes_checked": self.modes_checked,
            "interval": self.interval,
            "conditions_log": list(self.conditions_log),
            "data": self.data,
        }


def _sqrt_of_fraction(f: Fraction):
    """sqrt(f) as a Fraction when rational, else None (f >= 0)."""
    if f < 0:
        return None
    nd = f.numerator * f.denominator
    r = math.isqrt(nd)
    if r * r != nd:
        return None
    return Fraction(r, f.denominator)


def _kepler_condition(alpha: Alpha, p: int, log: list):
    """Condition (i): p sqrt(3 - alpha) not a natural number.

    Returns True (holds), False (fails exactly), or None (not decidable
    in floating point: suspiciously close to an integer).
    """
    a = alpha.value
    if a >= 3.0:
        log.append("condition (i): 3 - alpha <= 0, no positive Kepler zero; holds")
        return True
    if alpha.exact is not None:
        root = _sqrt_of_fraction(Fraction(3) - alpha.exact)
        if root is None:
            log.append("condition (i): sqrt(3 - alpha) irrational; holds")
            return True
        val = abs(p) * root
        if val.denominator == 1:
            log.append(f"condition (i): p*sqrt(3 - alpha) = {val} is a natural number; fails")
            return False
        log.append(f"condition (i): p*sqrt(3 - alpha) = {val} not an integer; holds")
        return True
    x = abs(p) * math.sqrt(3.0 - a)
    if abs(x - round(x)) < NEAR_ZERO_TOL:
        log.append(f"condition (i): p*sqrt(3 - alpha) = {x:.12g} within tolerance of an integer; undecidable for float alpha")
        return None
    log.append(f"condition (i): p*sqrt(3 - alpha) = {x:.12g}; holds")
    return True


def certify_polygon_weak(k: int, p: int, alpha, tol: float = NEAR_ZERO_TOL) -> CertResult:
    """Floating-point 2 pi p-nondegeneracy check for the unit k-gon.

    Sweeps det m_j(l/p) for j = 2..k-2 over |l| <= p * ceil(sqrt(
    max(b_j^2, |b_j|) + 2 a_j + 1) + 1), beyond which the determinant is
    provably positive; the j = 1, k-1 blocks restricted to the reduced
    subspace contribute (l/p -+ 1)^2 + 2 a_1, and the j = k block is the
    Kepler block with zeros only at 0 and sqrt(3 - alpha).
    """
    if k < 3:
        raise ValueError("k >= 3 required")
    if p == 0:
        raise ValueError("p must be nonzero")
    alpha = Alpha.parse(alpha)
    a = alpha.value
    p = int(p)
    log: list = []
    failing: list = []
    margin = math.inf
    checked = 0
    s = _s_array(k, alpha)

    # diagnostics: the paper's sufficient arithmetic conditions at alpha -> 1
    km1 = k - 1
    cond_ii_paper = True
    cond_ii_exact = True
    for j in range(2, k - 1):
        q = Fraction(p * p * j * (k - j), km1)
        if q.denominator == 1:
            cond_ii_paper = False
            if math.isqrt(q.numerator) ** 2 == q.numerator:
                cond_ii_exact = False
    log.append(f"condition (ii) [alpha->1 limit, p^2 j(k-j)/(k-1) not in N]: {'holds' if cond_ii_paper else 'fails'}")
    log.append(f"exact resonance test [integer l with l^2 = p^2 j(k-j)/(k-1)]: {'none' if cond_ii_exact else 'resonance exists'}")
    if cond_ii_paper != cond_ii_exact:
        log.append("note: condition (ii) is sufficient but not necessary; the exact test disagrees here")
    in_c = abs(p) % km1 != 0
    root = _sqrt_of_fraction(Fraction(3) - alpha.exact) if alpha.exact is not None else None
    if root is not None and root != 0 and (abs(p) * root).denominator == 1:
        in_c = False
    log.append(f"C_k,alpha membership [p not in (k-1)N u (3-alpha)^(-1/2)N]: {'in' if in_c else 'excluded'}")

    cond_i = _kepler_condition(alpha, p, log)
    z = math.sqrt(3.0 - a) if a < 3.0 else 0.0
    lmax_k = int(math.ceil(abs(p) * math.sqrt(3.0))) + 2
    for l in range(1, lmax_k + 1):
        mu_m, _ = mu_kepler(alpha, l / p)
        checked += 1
        if abs(mu_m) < tol:
            failing.append((k, l))
            failing.append((k, -l))
        else:
            margin = min(margin, abs(mu_m))
    if cond_i is False and not any(j == k for j, _ in failing):
        # exact resonance not visible at tol resolution; record it anyway
        failing.append((k, int(round(abs(p) * z))))
    log.append(f"block j=k swept for |l| <= {lmax_k} (zeros of mu^- only at 0 and sqrt(3-alpha))")

    # j = 1 and k-1 restricted to the reduced subspace
    a1 = block_coeffs(k, 1, alpha, s)[0]
    lmax_1 = abs(p) + int(math.ceil(abs(p) * math.sqrt(2.0 * a1 + 1.0))) + 1
    for j_res, sign in ((1, 1.0), (k - 1, -1.0)):
        for l in range(-lmax_1, lmax_1 + 1):
            val = (l / p + sign) ** 2 + 2.0 * a1
            checked += 1
            if abs(val) < tol:
                failing.append((j_res, l))
            else:
                margin = min(margin, abs(val))
    log.append(f"blocks j=1,k-1 restricted to the reduced subspace: (l/p -+ 1)^2 + 2*a1 with a1 = {a1:.6g}")

    # j = 2..k-2: vector sweep; l >= 0 suffices since P_{k-j}(x) = P_j(-x)
    for j in range(2, k - 1):
        aj, bj, gj = block_coeffs(k, j, alpha, s)
        lmax = abs(p) * int(math.ceil(math.sqrt(max(bj * bj, abs(bj)) + 2.0 * aj + 1.0) + 1.0))
        ls = np.arange(0, lmax + 1)
        lam = ls / p
        vals = ((lam - 1.0) ** 2 + aj - gj) * ((lam + 1.0) ** 2 + aj + gj) - bj * bj
        checked += len(ls)
        bad = np.abs(vals) < tol
        for l in ls[bad]:
            failing.append((j, int(l)))
        good = np.abs(vals[~bad])
        if len(good):
            margin = min(margin, float(good.min()))
    log.append("blocks j=2..k-2 swept over l >= 0 (P_{k-j}(x) = P_j(-x) covers l < 0)")

    if failing:
        verdict = "refuted"
    elif cond_i is None:
        verdict = "inconclusive"
    else:
        verdict = "certified"
    return CertResult(
        target=f"polygon k={k}, p={p}, alpha={a:g}",
        verdict=verdict,
        margin=0.0 if failing else margin,
        failing_modes=sorted(set(failing)),
        modes_checked=checked,
        interval=False,
        conditions_log=log,
        data={"condition_i": cond_i, "condition_ii_paper": cond_ii_paper, "condition_ii_exact": cond_ii_exact, "in_C_k_alpha": in_c},
    )


def certify_polygon_grav(k: int, m: int = 2, precision: str = "double") -> CertResult:
    """Rigorous 2 pi / m-nondegeneracy certificate for the k-gon at alpha = 2.

    Blocks j = 2..k-2 are checked with interval enclosures of P_j(l):
    pointwise for every integer 0 <= l <= L (all real roots satisfy
    lambda^2 <= 1 + |b_j|), plus one range enclosure certifying every
    lambda >= L; negative l are covered by P_{k-j}(x) = P_j(-x).  The
    j = 1, k-1 reduced blocks are bounded below by 1 + 2 a_1 > 0 and the
    j = k Kepler block is invertible on l in mZ since its only zeros are
    at 0 and 1.
    """
    if k < 4:
        raise ValueError("k >= 4 required")
    if m < 1:
        raise ValueError("m >= 1 required")
    alpha = Alpha(2.0, exact=Fraction(2))
    log: list = []
    failing: list = []
    data: dict = {"precision": precision}

    if m == 1:
        # mu^-(+-1) = 0: the homographic resonance is unavoidable
        log.append("m = 1: mu_k^-(+-1) = 0 (elliptic homographic orbits); refuted")
        return CertResult(
            target=f"polygon k={k}, m=1, alpha=2",
            verdict="refuted",
            margin=0.0,
            failing_modes=[(k, -1), (k, 1)],
            modes_checked=1,
            interval=True,
            conditions_log=log,
            data=data,
        )

    if precision == "extended":
        iv = [_s_iv_extended_one(k, j, alpha) for j in range(k + 1)]
        s_lo = np.array([v.lo for v in iv])
        s_hi = np.array([v.hi for v in iv])
    else:
        s_lo, s_hi = backends.s_all_iv(k, 2.0)
    data["s_max_width"] = float(np.max(s_hi - s_lo))

    margins, worst_l, status, checked = backends.grav_block_margins(s_lo, s_hi)
    margin = math.inf
    worst = None
    n_checked = int(checked.sum())
    for j in range(2, k - 1):
        if status[j] == 1:
            failing.append((j, int(worst_l[j])))
        elif status[j] == 2:
            failing.append((j, int(worst_l[j])))
        elif margins[j] < margin:
            margin = float(margins[j])
            worst = (j, int(worst_l[j]))
    if failing:
        log.append(f"interval enclosures straddle zero at modes {failing}; widen precision")
        return CertResult(
            target=f"polygon k={k}, m={m}, alpha=2",
            verdict="inconclusive",
            margin=0.0,
            failing_modes=sorted(set(failing)),
            modes_checked=n_checked,
            interval=True,
            conditions_log=log,
            data=data,
        )
    log.append("blocks j=2..k-2: pointwise enclosures to the root bound, one range enclosure for the tail; l < 0 by the j <-> k-j symmetry")
    data["worst_mode"] = worst
    data["block_margin"] = float(margin)

    # j = 1, k-1 restricted: (l -+ 1)^2 + 2 a_1 with a_1 = s_2 / (4 s_1) > 0
    s1 = Interval(float(s_lo[1]), float(s_hi[1]))
    s2 = Interval(float(s_lo[2]), float(s_hi[2]))
    a1 = idiv(s2, iscale(s1, 4.0))
    if not a1.lo > 0.0:
        log.append("a_1 enclosure not positive; widen precision")
        return CertResult(
            target=f"polygon k={k}, m={m}, alpha=2",
            verdict="inconclusive",
            margin=0.0,
            failing_modes=[(1, 0)],
            modes_checked=n_checked,
            interval=True,
            conditions_log=log,
            data=data,
        )
    # closest multiple of m to -+1 gives (l -+ 1)^2 >= 1 for m >= 2
    res_margin = 1.0 + 2.0 * a1.lo
    margin = min(margin, res_margin)
    log.append(f"blocks j=1,k-1 on the reduced subspace: >= 1 + 2*a_1 >= {res_margin:.6g} over l in mZ")

    # j = k on l in mZ \ {0}: |l| >= 2 > sqrt(3 - 2)
    mu_m, _ = mu_kepler(alpha, float(m))
    margin = min(margin, abs(mu_m))
    log.append(f"block j=k: zeros of mu^- at 0 and 1 only; min |mu^-| over l in mZ\\{{0}} at |l|={m}: {abs(mu_m):.6g}")
    log.append("l = 0: the single kernel direction is the rotation generator (allowed)")

    return CertResult(
        target=f"polygon k={k}, m={m}, alpha=2",
        verdict="certified",
        margin=float(margin),
        failing_modes=[],
        modes_checked=n_checked + 3,
        interval=True,
        conditions_log=log,
        data=data,
    )


def certify_lagrange(m1: float, m2: float, m3: float, alpha, p: int | None = None, m: int | None = None) -> CertResult:
    """Nondegeneracy of the Lagrange triangle from the mass inequality.

    For alpha != 2: certified when p sqrt(3 - alpha) is not a natural
    number and beta > 9 ((3-alpha)/(1+alpha))^2 (strict); equality is
    inconclusive.  For alpha = 2 with mode m >= 2: certified when
    beta > 1.  The four non-Kepler eigenvalues are reported.
    """
    alpha = Alpha.parse(alpha)
    a = alpha.value
    beta = mass_beta(m1, m2, m3)
    log: list = []
    disc = 9.0 * (a - 1.0) ** 2 - beta * (a + 3.0) ** 2
    sq = complex(disc) ** 0.5
    lam1 = 1j / 6.0 * complex(18.0 * (1.0 - a) + 6.0 * sq) ** 0.5
    lam2 = 1j / 6.0 * complex(18.0 * (1.0 - a) - 6.0 * sq) ** 0.5
    eigs = [lam1, -lam1, lam2, -lam2]
    data = {"beta": beta, "eigenvalues": [[z.real, z.imag] for z in eigs]}

    if a == 2.0:
        if m is None or m < 2:
            log.append("alpha = 2 without a symmetry mode m >= 2: the homographic resonance mu^-(+-1) = 0 is unavoidable; refuted")
            return CertResult(
                target=f"lagrange masses=({m1:g},{m2:g},{m3:g}), alpha=2, m={m or 1}",
                verdict="refuted",
                margin=0.0,
                failing_modes=[(3, -1), (3, 1)],
                conditions_log=log,
                data=data,
            )
        gap = beta - 1.0
        log.append(f"alpha = 2, m = {m}: Gascheau criterion beta > 1 with beta = {beta:.6g}")
        if gap > NEAR_ZERO_TOL:
            verdict = "certified"
        elif gap < -NEAR_ZERO_TOL:
            verdict = "inconclusive"
            log.append("beta <= 1: sufficient criterion fails (spectrum on the imaginary axis)")
        else:
            verdict = "inconclusive"
            log.append("beta = 1 boundary case")
        return CertResult(
            target=f"lagrange masses=({m1:g},{m2:g},{m3:g}), alpha=2, m={m}",
            verdict=verdict,
            margin=max(gap, 0.0),
            conditions_log=log,
            data=data,
        )

    if p is None or p == 0:
        raise ValueError("nonzero p required for alpha != 2")
    cond_i = _kepler_condition(alpha, p, log)
    bound = 9.0 * ((3.0 - a) / (1.0 + a)) ** 2
    gap = beta - bound
    data["routh_bound"] = bound
    log.append(f"mass inequality: beta = {beta:.6g} vs 9((3-alpha)/(1+alpha))^2 = {bound:.6g}")
    if cond_i is False:
        return CertResult(
            target=f"lagrange masses=({m1:g},{m2:g},{m3:g}), alpha={a:g}, p={p}",
            verdict="refuted",
            margin=0.0,
            failing_modes=[(3, int(round(abs(p) * math.sqrt(3.0 - a))))],
            conditions_log=log,
            data=data,
        )
    if gap > NEAR_ZERO_TOL and cond_i is True:
        verdict = "certified"
    elif abs(gap) <= NEAR_ZERO_TOL or cond_i is None:
        verdict = "inconclusive"
        if abs(gap) <= NEAR_ZERO_TOL:
            log.append("beta sits on the inequality boundary")
    else:
        verdict = "inconclusive"
        log.append("mass inequality fails: spectrum on the imaginary axis, sufficient criterion inapplicable")
    return CertResult(
        target=f"lagrange masses=({m1:g},{m2:g},{m3:g}), alpha={a:g}, p={p}",
        verdict=verdict,
        margin=max(gap, 0.0),
        conditions_log=log,
        data=data,
    )


# ---------------------------------------------------------------------------
# T-hat blocks for general configurations
# ---------------------------------------------------------------------------


def reduced_basis(masses) -> np.ndarray:
    """Orthonormal basis (2k x (2k-2)) of the zero-weighted-mean subspace
    {u : sum_k m_k u_k = 0} in the plain inner product."""
    m = np.asarray(masses, dtype=float)
    k = len(m)
    C = np.zeros((2, 2 * k))
    C[0, 0::2] = m
    C[1, 1::2] = m
    _, _, vt = np.linalg.svd(C)
    return vt[2:].T.copy()


def isotypic_basis(k: int) -> np.ndarray:
    """Unitary change of basis P with columns T_j(e1), T_j(e2), j = 1..k,
    where T_j(w)_t = k^(-1/2) exp(i j zeta t) R(zeta t) w."""
    zeta = 2.0 * math.pi / k
    P = np.zeros((2 * k, 2 * k), dtype=complex)
    for j in range(1, k + 1):
        for t in range(1, k + 1):
            c, sn = math.cos(zeta * t), math.sin(zeta * t)
            Rt = np.array([[c, -sn], [sn, c]], dtype=complex)
            P[2 * (t - 1) : 2 * t, 2 * (j - 1) : 2 * j] = (
                np.exp(1j * j * zeta * t) / math.sqrt(k) * Rt
            )
    return P


def hatT_block(cc: CentralConfiguration, l: int, p: int) -> np.ndarray:
    """T-hat_{l} on the complexified reduced subspace:

        (1 + l^2)^-1 * Q^H ((l/p)^2 M - 2i (l/p) M J + Hess V[a]) Q

    with Q an explicit orthonormal basis of the zero-weighted-mean
    subspace."""
    if p == 0:
        raise ValueError("p must be nonzero")
    k = cc.n
    lam = l / p
    H = amended_potential(cc.positions, cc.masses, cc.alpha, order=2).hessian
    M = np.repeat(cc.masses, 2)
    MJ = np.zeros((2 * k, 2 * k))
    for i in range(k):
        MJ[2 * i, 2 * i + 1] = -cc.masses[i]
        MJ[2 * i + 1, 2 * i] = cc.masses[i]
    A = lam * lam * np.diag(M) - 2j * lam * MJ + H
    Q = reduced_basis(cc.masses)
    return Q.T @ A @ Q / (1.0 + l * l)


def polygon_hatT_eigs(k: int, alpha, p: int, l: int):
    """Predicted spectrum of T-hat_l for the unit k-gon from the closed-form
    blocks: both eigenvalues of m_j(l/p) for j = 2..k-2 and j = k, plus
    the reduced single eigenvalues (l/p + 1)^2 + 2 a_1 of j = 1 and
    (l/p - 1)^2 + 2 a_1 of j = k-1, all divided by 1 + l^2."""
    alpha = Alpha.parse(alpha)
    lam = l / p
    s = _s_array(k, alpha)
    out = []
    for j in range(2, k - 1):
        out.extend(block_eigs(k, j, alpha, lam, s))
    out.extend(mu_kepler(alpha, lam))
    a1 = block_coeffs(k, 1, alpha, s)[0]
    out.append((lam + 1.0) ** 2 + 2.0 * a1)
    out.append((lam - 1.0) ** 2 + 2.0 * a1)
    return np.sort(np.array(out) / (1.0 + l * l))


def certify_a0(cc0: CentralConfiguration, tol: float = 1e-8) -> CertResult:
    """Nondegeneracy of a central configuration in the sense of the reduced
    amended potential: the projected Hessian on the zero-weighted-mean
    subspace has exactly the rotational kernel."""
    H = amended_potential(cc0.positions, cc0.masses, cc0.alpha, order=2).hessian
    Q = reduced_basis(cc0.masses)
    Hred = Q.T @ H @ Q
    w, v = np.linalg.eigh(Hred)
    rot = Q.T @ rotation_mode(cc0.positions)
    nrot = np.linalg.norm(rot)
    log = []
    zero_idx = [i for i, lam in enumerate(w) if abs(lam) < tol]
    log.append(f"projected Hessian eigenvalues within tol of 0: {len(zero_idx)}")
    data = {"eigenvalues": w.tolist(), "kernel_dim": len(zero_idx)}
    if len(zero_idx) != 1:
        verdict = "refuted" if len(zero_idx) > 1 else "inconclusive"
        if verdict == "inconclusive":
            log.append("no zero mode found within tolerance; rotation mode residual too large?")
            return CertResult("a0 nondegeneracy", verdict, 0.0, [], len(w), False, log, data)
        return CertResult("a0 nondegeneracy", verdict, 0.0, [(0, 0)], len(w), False, log, data)
    i0 = zero_idx[0]
    cosine = abs(v[:, i0] @ rot) / nrot
    data["rotation_cosine"] = float(cosine)
    others = np.abs(np.delete(w, i0))
    margin = float(others.min())
    if cosine < 1.0 - 1e-6:
        log.append(f"zero mode not aligned with rotation generator (cos = {cosine:.3g})")
        return CertResult("a0 nondegeneracy", "refuted", 0.0, [(0, 0)], len(w), False, log, data)
    if margin < 10.0 * tol:
        log.append(f"second eigenvalue {margin:.3e} within 10x tol of zero")
        return CertResult("a0 nondegeneracy", "inconclusive", margin, [], len(w), False, log, data)
    log.append(f"single rotational zero mode (cos = {cosine:.9f}); spectral gap {margin:.6g}")
    return CertResult("a0 nondegeneracy", "certified", margin, [], len(w), False, log, data)


def certify_general(cc: CentralConfiguration, p: int, tol: float = NEAR_ZERO_TOL) -> CertResult:
    """Numeric 2 pi p-nondegeneracy sweep of the T-hat blocks for a solved
    configuration.  The sweep bound is the smallest l at which the
    (l/p)^2 M term provably dominates; min singular values below tol are
    refutations, values within 10x tol are inconclusive."""
    if p == 0:
        raise ValueError("p must be nonzero")
    H = amended_potential(cc.positions, cc.masses, cc.alpha, order=2).hessian
    Hn = np.linalg.norm(H, 2)
    mmin = float(cc.masses.min())
    mmax = float(cc.masses.max())
    # (l/p)^2 mmin > 2 Hn + 2 (l/p) mmax
    x = (2.0 * mmax + math.sqrt(4.0 * mmax * mmax + 8.0 * mmin * Hn)) / (2.0 * mmin)
    lmax = int(math.ceil(abs(p) * x)) + 1
    log = [f"sweep |l| <= {lmax} (quadratic term dominates beyond)"]
    failing = []
    margin = math.inf
    worst = None

    T0 = hatT_block(cc, 0, p).real
    w, v = np.linalg.eigh(T0)
    rot = reduced_basis(cc.masses).T @ rotation_mode(cc.positions)
    rot = rot / np.linalg.norm(rot)
    align = np.abs(v.T @ rot)
    i_rot = int(np.argmax(align))
    log.append(f"l = 0: rotation mode eigenvalue {w[i_rot]:.3e} excluded (cos = {align[i_rot]:.6f})")
    others = np.abs(np.delete(w, i_rot))
    m0 = float(others.min())
    if m0 < tol:
        failing.append((0, 0))
    elif m0 < margin:
        margin = m0
        worst = (0, 0)

    for l in range(1, lmax + 1):
        T = hatT_block(cc, l, p)
        sv = np.linalg.svd(T, compute_uv=False)
        smin = float(sv.min()) * (1.0 + l * l)  # undo the compact scaling for comparability
        if smin < tol:
            # block index 0: mode not attributed to an isotypic block
            failing.append((0, l))
            failing.append((0, -l))
        elif smin < margin:
            margin = smin
            worst = (0, l)
    log.append("sigma_min reported without the (1+l^2)^-1 factor; +-l give equal singular values")

    if failing:
        verdict = "refuted"
        modes = sorted(set((jl[0], jl[1]) for jl in failing))
        return CertResult(
            target=f"general cc (n={cc.n}), p={p}, alpha={cc.alpha.value:g}",
            verdict=verdict,
            margin=0.0,
            failing_modes=modes,
            modes_checked=lmax + 1,
            conditions_log=log,
            data={"worst_mode": worst},
        )
    if margin < 10.0 * tol:
        return CertResult(
            target=f"general cc (n={cc.n}), p={p}, alpha={cc.alpha.value:g}",
            verdict="inconclusive",
            margin=float(margin),
            failing_modes=[],
            modes_checked=lmax + 1,
            conditions_log=log,
            data={"worst_mode": worst},
        )
    return CertResult(
        target=f"general cc (n={cc.n}), p={p}, alpha={cc.alpha.value:g}",
        verdict="certified",
        margin=float(margin),
        failing_modes=[],
        modes_checked=lmax + 1,
        conditions_log=log,
        data={"worst_mode": worst},
    )
