"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

The backend is selected once at import from the environment variable
``CAROUSEL_BACKEND`` ("numba" or "numpy"; default numba when importable).
Both implementations are kept importable so the benchmark in
``benchmarks/`` can compare them directly.

Kernels:
  * pairwise N-body accelerations and minimum pair distance,
  * the polygon coefficients s_j (all j at once, O(k^2)),
  * outward-rounded interval versions of s_j,
  * the per-block interval sweep behind the gravitational certificate.

Interval kernels use the same semantics as :mod:`carousel.interval`:
round to nearest, then inflate one ulp outward (two ulps after libm sin,
which is assumed faithful to < 1 ulp).
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = ["BACKEND", "HAS_NUMBA", "accel", "min_pair_dist", "s_all", "s_all_iv", "grav_block_margins", "numba_impl", "numpy_impl"]

_ENV = os.environ.get("CAROUSEL_BACKEND", "").strip().lower()

try:
    if _ENV == "numpy":
        raise ImportError("numba disabled by CAROUSEL_BACKEND")
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

    def prange(*args):
        return range(*args)


_INF = math.inf


# ---------------------------------------------------------------------------
# numba implementations (plain Python functions when numba is unavailable)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _accel_nb(pos, masses, alpha):
    n = pos.shape[0]
    out = np.zeros((n, 2))
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            r2 = dx * dx + dy * dy
            f = r2 ** (-0.5 * (alpha + 1.0))
            fx = dx * f
            fy = dy * f
            out[i, 0] -= masses[j] * fx
            out[i, 1] -= masses[j] * fy
            out[j, 0] += masses[i] * fx
            out[j, 1] += masses[i] * fy
    return out


@njit(cache=True)
def _min_pair_dist_nb(pos):
    n = pos.shape[0]
    best = _INF
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d < best:
                best = d
    return best


@njit(cache=True, parallel=True)
def _s_all_nb(k, alpha):
    # s_j = 2^-alpha * sum_l sin^2(j l pi / k) / sin^(alpha+1)(l pi / k)
    s = np.zeros(k + 1)
    half = np.empty(k)  # sin(m pi / k) for m = 0..k-1
    for m in range(k):
        half[m] = math.sin(m * math.pi / k)
    scale = 2.0 ** (-alpha)
    for j in prange(1, k):
        acc = 0.0
        for l in range(1, k):
            m = (j * l) % k
            sm = half[m]
            acc += scale * sm * sm * half[l] ** (-(alpha + 1.0))
        s[j] = acc
    return s


@njit(cache=True, inline="always")
def _dn(x):
    return math.nextafter(x, -_INF)


@njit(cache=True, inline="always")
def _upf(x):
    return math.nextafter(x, _INF)


@njit(cache=True, inline="always")
def _mul_iv(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = min(min(p1, p2), min(p3, p4))
    hi = max(max(p1, p2), max(p3, p4))
    return _dn(lo), _upf(hi)


# math.pi is below the true pi.
_PI_LO = math.pi
_PI_HI = math.nextafter(math.pi, _INF)


@njit(cache=True)
def _sin_table_iv(k):
    """Enclosures of sin(m pi / k) for m = 0..k-1 (values in [0, 1])."""
    lo = np.empty(k)
    hi = np.empty(k)
    lo[0] = 0.0
    hi[0] = 0.0
    for m in range(1, k):
        mf = min(m, k - m)  # sin(m pi/k) = sin((k-m) pi/k)
        if 2 * mf == k:
            lo[m] = 1.0
            hi[m] = 1.0
            continue
        xlo = _dn(_dn(mf * _PI_LO) / k)
        xhi = _upf(_upf(mf * _PI_HI) / k)
        # argument lies strictly inside (0, pi/2): sin is increasing there
        slo = _dn(_dn(math.sin(xlo)))
        shi = _upf(_upf(math.sin(xhi)))
        lo[m] = max(slo, 0.0)
        hi[m] = min(shi, 1.0)
    return lo, hi


@njit(cache=True, parallel=True)
def _s_all_iv_nb(k, alpha):
    """Interval s_j for j = 0..k.  Exact power handling for integer alpha."""
    slo, shi = _sin_table_iv(k)
    # w_l = sin(l pi/k)^-(alpha+1), decreasing in sin
    wlo = np.empty(k)
    whi = np.empty(k)
    int_alpha = alpha == math.floor(alpha)
    p = int(alpha) + 1
    for l in range(1, k):
        if int_alpha:
            clo = slo[l]
            chi = shi[l]
            for _ in range(p - 1):
                clo = _dn(clo * slo[l])
                chi = _upf(chi * shi[l])
        else:
            # libm pow assumed faithful; four-ulp slack
            clo = _dn(_dn(_dn(_dn(shi[l] ** (-(alpha + 1.0))))))
            chi = _upf(_upf(_upf(_upf(slo[l] ** (-(alpha + 1.0))))))
            wlo[l] = max(clo, 0.0)
            whi[l] = chi
            continue
        wlo[l] = _dn(1.0 / chi)
        whi[l] = _upf(1.0 / clo)
    out_lo = np.zeros(k + 1)
    out_hi = np.zeros(k + 1)
    for j in prange(1, k):
        acc_lo = 0.0
        acc_hi = 0.0
        for l in range(1, k):
            m = (j * l) % k
            if m == 0:
                continue
            nlo = _dn(slo[m] * slo[m])
            nhi = _upf(shi[m] * shi[m])
            tlo = _dn(nlo * wlo[l])
            thi = _upf(nhi * whi[l])
            acc_lo = _dn(acc_lo + tlo)
            acc_hi = _upf(acc_hi + thi)
        if int_alpha:
            # 2^-alpha scaling is exact
            out_lo[j] = math.ldexp(acc_lo, -int(alpha))
            out_hi[j] = math.ldexp(acc_hi, -int(alpha))
        else:
            c = 2.0 ** (-alpha)
            out_lo[j] = _dn(_dn(_dn(acc_lo * c)))
            out_hi[j] = _upf(_upf(_upf(acc_hi * c)))
    return out_lo, out_hi


@njit(cache=True, parallel=True)
def _grav_block_margins_nb(s_lo, s_hi):
    """Rigorous sweep of P_j(l) = det m_j(l) for alpha = 2, j = 2..k-2.

    For each j: pointwise enclosures of P_j(l) for l = 0..L_pw, where all
    real roots satisfy lambda^2 <= 1 + |beta_j|, then a single range
    enclosure valid for every lambda >= L_pw (both quadratic factors are
    increasing there), which covers the remaining integers out to
    infinity.  Checking l >= 0 suffices: P_{k-j}(lambda) = P_j(-lambda).

    Returns (margin, worst_l, status, checked) per j; status 0 = proved
    nonzero everywhere, 1 = some enclosure straddles zero, 2 = tail bound
    not positive.
    """
    k = s_lo.shape[0] - 1
    margins = np.full(k + 1, np.nan)
    worst_l = np.full(k + 1, -1, dtype=np.int64)
    status = np.zeros(k + 1, dtype=np.int64)
    checked = np.zeros(k + 1, dtype=np.int64)
    s1_lo = s_lo[1]
    s1_hi = s_hi[1]
    for j in prange(2, k - 1):
        # alpha_j -+ gamma_j = s_{j-+1} / (2 s_1); beta_j = 3 (s_j - s_1) / (2 s_1)
        d_lo = _dn(2.0 * s1_lo)
        d_hi = _upf(2.0 * s1_hi)
        amg_lo = _dn(s_lo[j - 1] / d_hi)
        amg_hi = _upf(s_hi[j - 1] / d_lo)
        apg_lo = _dn(s_lo[j + 1] / d_hi)
        apg_hi = _upf(s_hi[j + 1] / d_lo)
        nm_lo = _dn(3.0 * _dn(s_lo[j] - s_hi[1]))
        nm_hi = _upf(3.0 * _upf(s_hi[j] - s_lo[1]))
        b_lo = _dn(nm_lo / d_hi)
        b_hi = _upf(nm_hi / d_lo)
        babs = max(abs(b_lo), abs(b_hi))
        if b_lo <= 0.0 <= b_hi:
            bsq_lo = 0.0
        else:
            bsq_lo = _dn(min(b_lo * b_lo, b_hi * b_hi))
        bsq_hi = _upf(babs * babs)
        a_hi = _upf(0.5 * _upf(amg_hi + apg_hi))
        l_pw = int(math.ceil(math.sqrt(1.0 + babs + 2.0 * a_hi))) + 1
        best = _INF
        best_l = -1
        stat = 0
        for l in range(0, l_pw + 1):
            am = float((l - 1) * (l - 1))
            ap = float((l + 1) * (l + 1))
            f1_lo = _dn(am + amg_lo)
            f1_hi = _upf(am + amg_hi)
            f2_lo = _dn(ap + apg_lo)
            f2_hi = _upf(ap + apg_hi)
            pr_lo, pr_hi = _mul_iv(f1_lo, f1_hi, f2_lo, f2_hi)
            p_lo = _dn(pr_lo - bsq_hi)
            p_hi = _upf(pr_hi - bsq_lo)
            if p_lo > 0.0:
                m = p_lo
            elif p_hi < 0.0:
                m = -p_hi
            else:
                stat = 1
                best = 0.0
                best_l = l
                break
            if m < best:
                best = m
                best_l = l
        checked[j] = l_pw + 1
        if stat == 0:
            # one enclosure certifies every lambda >= l_pw
            am = float((l_pw - 1) * (l_pw - 1))
            ap = float((l_pw + 1) * (l_pw + 1))
            tail_lo = _dn(_dn(_dn(am + amg_lo) * _dn(ap + apg_lo)) - bsq_hi)
            if tail_lo <= 0.0:
                stat = 2
                best = tail_lo
                best_l = l_pw
        margins[j] = best
        worst_l[j] = best_l
        status[j] = stat
    return margins, worst_l, status, checked


# ---------------------------------------------------------------------------
# numpy fallbacks (vectorized, same outward-rounding semantics)
# ---------------------------------------------------------------------------


def _accel_np(pos, masses, alpha):
    d = pos[:, None, :] - pos[None, :, :]  # (N, N, 2)
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, 1.0)
    f = r2 ** (-0.5 * (alpha + 1.0))
    np.fill_diagonal(f, 0.0)
    return -np.einsum("j,ij,ijk->ik", masses, f, d)


def _min_pair_dist_np(pos):
    d = pos[:, None, :] - pos[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    iu = np.triu_indices(len(pos), k=1)
    return float(r[iu].min())


def _s_all_np(k, alpha):
    half = np.sin(np.arange(k) * (math.pi / k))
    w = np.zeros(k)
    w[1:] = half[1:] ** (-(alpha + 1.0))
    jl = (np.arange(k + 1)[:, None] * np.arange(k)[None, :]) % k
    num = half[jl] ** 2
    return 2.0 ** (-alpha) * (num[:, 1:] * w[1:]).sum(axis=1)


def _nadn(x):
    return np.nextafter(x, -_INF)


def _naup(x):
    return np.nextafter(x, _INF)


def _sin_table_iv_np(k):
    m = np.arange(k)
    mf = np.minimum(m, k - m)
    xlo = _nadn(_nadn(mf * _PI_LO) / k)
    xhi = _naup(_naup(mf * _PI_HI) / k)
    lo = np.maximum(_nadn(_nadn(np.sin(xlo))), 0.0)
    hi = np.minimum(_naup(_naup(np.sin(xhi))), 1.0)
    exact = 2 * mf == k
    lo[exact] = 1.0
    hi[exact] = 1.0
    lo[0] = hi[0] = 0.0
    return lo, hi


def _s_all_iv_np(k, alpha):
    slo, shi = _sin_table_iv_np(k)
    int_alpha = alpha == math.floor(alpha)
    if int_alpha:
        p = int(alpha) + 1
        clo, chi = slo.copy(), shi.copy()
        for _ in range(p - 1):
            clo = _nadn(clo * slo)
            chi = _naup(chi * shi)
        with np.errstate(divide="ignore"):
            wlo = _nadn(1.0 / chi)
            whi = _naup(1.0 / clo)
    else:
        with np.errstate(divide="ignore"):
            wlo = _nadn(_nadn(_nadn(_nadn(shi ** (-(alpha + 1.0))))))
            whi = _naup(_naup(_naup(_naup(slo ** (-(alpha + 1.0))))))
        wlo = np.maximum(wlo, 0.0)
    out_lo = np.zeros(k + 1)
    out_hi = np.zeros(k + 1)
    for j in range(1, k):
        m = (j * np.arange(1, k)) % k
        keep = m != 0
        ml = m[keep]
        ll = np.arange(1, k)[keep]
        tlo = _nadn(_nadn(slo[ml] * slo[ml]) * wlo[ll])
        thi = _naup(_naup(shi[ml] * shi[ml]) * whi[ll])
        alo = 0.0
        ahi = 0.0
        for a, b in zip(tlo, thi):
            alo = _nadn(alo + a)
            ahi = _naup(ahi + b)
        if int_alpha:
            out_lo[j] = math.ldexp(alo, -int(alpha))
            out_hi[j] = math.ldexp(ahi, -int(alpha))
        else:
            c = 2.0 ** (-alpha)
            out_lo[j] = _nadn(_nadn(_nadn(alo * c)))
            out_hi[j] = _naup(_naup(_naup(ahi * c)))
    return out_lo, out_hi


def _grav_block_margins_np(s_lo, s_hi):
    # scalar loop mirror of the numba kernel; correctness reference
    k = s_lo.shape[0] - 1
    margins = np.full(k + 1, np.nan)
    worst_l = np.full(k + 1, -1, dtype=np.int64)
    status = np.zeros(k + 1, dtype=np.int64)
    checked = np.zeros(k + 1, dtype=np.int64)
    dn = lambda x: math.nextafter(x, -_INF)
    up = lambda x: math.nextafter(x, _INF)
    s1_lo, s1_hi = s_lo[1], s_hi[1]
    for j in range(2, k - 1):
        d_lo, d_hi = dn(2 * s1_lo), up(2 * s1_hi)
        amg = (dn(s_lo[j - 1] / d_hi), up(s_hi[j - 1] / d_lo))
        apg = (dn(s_lo[j + 1] / d_hi), up(s_hi[j + 1] / d_lo))
        b_lo = dn(dn(3.0 * dn(s_lo[j] - s_hi[1])) / d_hi)
        b_hi = up(up(3.0 * up(s_hi[j] - s_lo[1])) / d_lo)
        babs = max(abs(b_lo), abs(b_hi))
        bsq_lo = 0.0 if b_lo <= 0.0 <= b_hi else dn(min(b_lo * b_lo, b_hi * b_hi))
        bsq_hi = up(babs * babs)
        a_hi = up(0.5 * up(amg[1] + apg[1]))
        l_pw = int(math.ceil(math.sqrt(1.0 + babs + 2.0 * a_hi))) + 1
        best, best_l, stat = _INF, -1, 0
        for l in range(0, l_pw + 1):
            am, ap = float((l - 1) ** 2), float((l + 1) ** 2)
            f1 = (dn(am + amg[0]), up(am + amg[1]))
            f2 = (dn(ap + apg[0]), up(ap + apg[1]))
            ps = (f1[0] * f2[0], f1[0] * f2[1], f1[1] * f2[0], f1[1] * f2[1])
            p_lo = dn(dn(min(ps)) - bsq_hi)
            p_hi = up(up(max(ps)) - bsq_lo)
            if p_lo > 0.0:
                m = p_lo
            elif p_hi < 0.0:
                m = -p_hi
            else:
                stat, best, best_l = 1, 0.0, l
                break
            if m < best:
                best, best_l = m, l
        checked[j] = l_pw + 1
        if stat == 0:
            am, ap = float((l_pw - 1) ** 2), float((l_pw + 1) ** 2)
            tail = dn(dn(dn(am + amg[0]) * dn(ap + apg[0])) - bsq_hi)
            if tail <= 0.0:
                stat, best, best_l = 2, tail, l_pw
        margins[j], worst_l[j], status[j] = best, best_l, stat
    return margins, worst_l, status, checked


class _Impl:
    def __init__(self, name, accel, min_pair_dist, s_all, s_all_iv, grav):
        self.name = name
        self.accel = accel
        self.min_pair_dist = min_pair_dist
        self.s_all = s_all
        self.s_all_iv = s_all_iv
        self.grav_block_margins = grav


numpy_impl = _Impl("numpy", _accel_np, _min_pair_dist_np, _s_all_np, _s_all_iv_np, _grav_block_margins_np)

if HAS_NUMBA:
    numba_impl = _Impl("numba", _accel_nb, _min_pair_dist_nb, _s_all_nb, _s_all_iv_nb, _grav_block_margins_nb)
    _active = numpy_impl if _ENV == "numpy" else numba_impl
else:
    numba_impl = None
    _active = numpy_impl

BACKEND = _active.name


def accel(pos, masses, alpha):
    """Pairwise accelerations a_i = -sum_j m_j (q_i - q_j) / |q_i - q_j|^(alpha+1)."""
    return _active.accel(np.ascontiguousarray(pos, dtype=float), np.ascontiguousarray(masses, dtype=float), float(alpha))


def min_pair_dist(pos):
    return _active.min_pair_dist(np.ascontiguousarray(pos, dtype=float))


def s_all(k, alpha):
    """Float s_j for j = 0..k."""
    return _active.s_all(int(k), float(alpha))


def s_all_iv(k, alpha):
    """Outward-rounded interval s_j for j = 0..k; returns (lo, hi) arrays."""
    return _active.s_all_iv(int(k), float(alpha))


def grav_block_margins(s_lo, s_hi):
    """Interval sweep of det m_j(l) over integers l for alpha = 2."""
    return _active.grav_block_margins(np.asarray(s_lo, float), np.asarray(s_hi, float))
