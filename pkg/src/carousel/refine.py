"""Fourier-Galerkin refinement of synthesized carousel orbits.

The scaled coordinates u = (u_0, u_1, ..., u_{n0}) are 2 pi-periodic
paths; u_0 collects the n cluster centers (masses M_j), u_j the bodies of
cluster j (masses m_{j,k}).  Planar points are stored as complex numbers,
so the complex structure J acts as multiplication by i, path reality is
automatic, and the per-mode quadratic operators are scalars:

    grad_j A = (1 - d_ss)^-1 [ r_j^(1-alpha) ( M_j (nu/w_j d_s + i)^2* u_j
               + grad U_j(u_j) ) + grad_j h ],

which on the Fourier mode l multiplies u_j by (l nu/w_j + 1)^2 M_j.  The
nonlinear terms (cluster potentials and the coupling integrand h) are
evaluated pseudo-spectrally on >= 4L+1 equispaced nodes and transformed
back; the holonomic zero-weighted-mean projection is applied per mode.

The refinement solves the projected-gradient equations by a damped
bordered Newton iteration: the exact diagonal-group phase direction is
sliced out by one bordered row, per-cluster phase locks stabilize the
nearly-null phase directions during early iterations and are released
for the final polish so the converged path solves the genuine equations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .carousel import CarouselFamily, CarouselPlan
from .core import Alpha, CollisionError, ConvergenceError, as_complex
from .dynamics import PhaseState

__all__ = [
    "FourierPath",
    "RefineOpts",
    "RefineReport",
    "lift_family",
    "action_gradient",
    "discrete_action",
    "refine_orbit",
    "to_inertial",
    "inertial_residual",
]


def _block_masses(family: CarouselFamily):
    out = [family.base.masses.copy()]
    for cc in family.clusters:
        out.append(cc.masses.copy())
    return out


def _reduced_basis_c(masses) -> np.ndarray:
    """Complex orthonormal basis (d x (d-1)) of {c : sum m_pt c_pt = 0}."""
    m = np.asarray(masses, dtype=float)
    d = len(m)
    A = np.zeros((1, d))
    A[0] = m
    _, _, vt = np.linalg.svd(A)
    return vt[1:].T.astype(complex)


@dataclass
class FourierPath:
    """Truncated Fourier coefficients of the scaled path, one complex array
    of shape (2L+1, d_b) per block, mode order -L..L.  Block 0 is u_0; the
    zero-weighted-mean constraint holds on every mode."""

    L: int
    coeffs: list

    def __post_init__(self):
        if len(self.coeffs[0]) != 2 * self.L + 1:
            raise ValueError("coefficient arrays must have 2L+1 rows")

    @property
    def n_blocks(self) -> int:
        return len(self.coeffs)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    def copy(self) -> "FourierPath":
        return FourierPath(self.L, [c.copy() for c in self.coeffs])

    def mode(self, b: int, l: int) -> np.ndarray:
        return self.coeffs[b][l + self.L]

    def norm(self) -> float:
        return math.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in self.coeffs))

    def tail_energy(self) -> float:
        """Relative weight of the |l| = L coefficients."""
        tail = sum(float(np.sum(np.abs(c[0]) ** 2) + np.sum(np.abs(c[-1]) ** 2)) for c in self.coeffs)
        tot = self.norm() ** 2
        return math.sqrt(tail / tot) if tot > 0 else 0.0

    def resize(self, L_new: int) -> "FourierPath":
        out = []
        for c in self.coeffs:
            d = c.shape[1]
            buf = np.zeros((2 * L_new + 1, d), dtype=complex)
            lo = min(self.L, L_new)
            buf[L_new - lo : L_new + lo + 1] = c[self.L - lo : self.L + lo + 1]
            out.append(buf)
        return FourierPath(L_new, out)

    def eval_at(self, b: int, s) -> np.ndarray:
        """z_b(s) for scalar or vector s, shape (..., d_b)."""
        s = np.asarray(s, dtype=float)
        phase = np.exp(1j * np.multiply.outer(s, self.modes.astype(float)))
        return phase @ self.coeffs[b]

    def deriv(self, order: int = 1) -> "FourierPath":
        fac = (1j * self.modes.astype(float)) ** order
        return FourierPath(self.L, [fac[:, None] * c for c in self.coeffs])


def lift_family(family: CarouselFamily, plan: CarouselPlan, L: int = 32) -> FourierPath:
    """Constant-path lift: mode 0 carries a_0 and exp(i theta_j) a_j."""
    coeffs = [np.zeros((2 * L + 1, family.n), dtype=complex)]
    coeffs[0][L] = as_complex(family.base.positions)
    for j, cc in enumerate(family.clusters):
        c = np.zeros((2 * L + 1, cc.n), dtype=complex)
        c[L] = np.exp(1j * plan.phases[j]) * as_complex(cc.positions)
        coeffs.append(c)
    return FourierPath(L, coeffs)


def _nodes(L: int, oversample: int = 4) -> np.ndarray:
    n = oversample * L + 1
    return np.arange(n) * (2.0 * math.pi / n)


def _to_nodes(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Values at n equispaced nodes from modes -L..L (columns = points)."""
    L = (coeffs.shape[0] - 1) // 2
    buf = np.zeros((n, coeffs.shape[1]), dtype=complex)
    for i, l in enumerate(range(-L, L + 1)):
        buf[l % n] += coeffs[i]
    return np.fft.ifft(buf, axis=0) * n


def _to_modes(values: np.ndarray, L: int) -> np.ndarray:
    """Truncated forward transform: coefficient of e^{ils}, |l| <= L."""
    n = values.shape[0]
    spec = np.fft.fft(values, axis=0) / n
    out = np.empty((2 * L + 1, values.shape[1]), dtype=complex)
    for i, l in enumerate(range(-L, L + 1)):
        out[i] = spec[l % n]
    return out


def _pair_force(z: np.ndarray, masses, a: float, guard: float):
    """Complex gradient of U_b(z) = sum_{i<j} m_i m_j phi(|z_i - z_j|) per
    node row, plus the potential values; raises on node collisions."""
    nnode, d = z.shape
    grad = np.zeros_like(z)
    pot = np.zeros(nnode)
    for i in range(d):
        for j in range(i + 1, d):
            dz = z[:, i] - z[:, j]
            r = np.abs(dz)
            if np.any(r < guard):
                raise CollisionError(f"collocation-node collision between points {i},{j}")
            f = masses[i] * masses[j] * dz * r ** (-(a + 1.0))
            grad[:, i] -= f
            grad[:, j] += f
            if a == 1.0:
                pot += -masses[i] * masses[j] * np.log(r)
            elif a == 2.0:
                pot += masses[i] * masses[j] / r
            else:
                pot += masses[i] * masses[j] * r ** (1.0 - a) / (a - 1.0)
    return grad, pot


def _coupling_terms(z_blocks, s, plan: CarouselPlan, family: CarouselFamily, a: float, guard: float):
    """Complex gradients of the coupling integrand h with respect to every
    block, plus nodal values of h."""
    n = family.n
    n0 = family.n0
    masses = _block_masses(family)
    z0 = z_blocks[0]  # (nnode, n)
    nnode = z0.shape[0]
    g = [np.zeros_like(zb) for zb in z_blocks]
    hval = np.zeros(nnode)
    rotors = [np.exp(1j * plan.p_list[j] * s) for j in range(n0)]

    def phi_arr(r):
        if a == 1.0:
            return -np.log(r)
        if a == 2.0:
            return 1.0 / r
        return r ** (1.0 - a) / (a - 1.0)

    for j in range(1, n + 1):
        mj = masses[j] if j <= n0 else np.array([family.base.masses[j - 1]])
        kj = len(mj)
        for jp in range(j + 1, n + 1):
            mjp = masses[jp] if jp <= n0 else np.array([family.base.masses[jp - 1]])
            kjp = len(mjp)
            D = z0[:, j - 1] - z0[:, jp - 1]
            rD = np.abs(D)
            if np.any(rD < guard):
                raise CollisionError(f"cluster centers {j},{jp} collide at a node")
            fD = D * rD ** (-(a + 1.0))
            phiD = phi_arr(rD)
            for k in range(kj):
                zk = plan.radii[j - 1] * rotors[j - 1] * z_blocks[j][:, k] if j <= n0 else 0.0
                for kp in range(kjp):
                    zkp = plan.radii[jp - 1] * rotors[jp - 1] * z_blocks[jp][:, kp] if jp <= n0 else 0.0
                    X = D + zk - zkp
                    rX = np.abs(X)
                    if np.any(rX < guard):
                        raise CollisionError(f"bodies ({j},{k + 1}) and ({jp},{kp + 1}) collide at a node")
                    mm = mj[k] * mjp[kp]
                    fX = X * rX ** (-(a + 1.0))
                    hval += mm * (phi_arr(rX) - phiD)
                    g[0][:, j - 1] += mm * (fD - fX)
                    g[0][:, jp - 1] -= mm * (fD - fX)
                    if j <= n0:
                        g[j][:, k] += mm * (-fX) * plan.radii[j - 1] * np.conj(rotors[j - 1])
                    if jp <= n0:
                        g[jp][:, kp] -= mm * (-fX) * plan.radii[jp - 1] * np.conj(rotors[jp - 1])
    return g, hval


def _quad_factors(path: FourierPath, plan: CarouselPlan):
    """Per-block (c_b, pref_b): the derivative factor in (c_b d_s + i) and
    the r^(1-alpha) prefactor."""
    a = plan.alpha.value
    out = [(plan.nu, 1.0)]
    for j in range(plan.n0):
        out.append((plan.nu / plan.omega[j], plan.radii[j] ** (1.0 - a)))
    return out


def action_gradient(
    path: FourierPath,
    plan: CarouselPlan,
    family: CarouselFamily,
    include_coupling: bool = True,
    preconditioned: bool = True,
    project: bool = True,
    oversample: int = 4,
):
    """Projected H^1 gradient of the action as a FourierPath.

    Quadratic parts act diagonally per mode; grad U_b and grad h are
    collocated on 4L+1 nodes (dealiasing oversampling) and transformed
    back; the (1 - d_ss)^-1 preconditioner divides mode l by 1 + l^2, and
    the holonomic projection removes the weighted-mean direction.
    """
    a = plan.alpha.value
    masses = _block_masses(family)
    L = path.L
    s = _nodes(L, oversample)
    nnode = len(s)
    z_blocks = [_to_nodes(c, nnode) for c in path.coeffs]
    scale = max(max(float(np.abs(z).max()) for z in z_blocks), 1.0)
    guard = 1e-12 * scale

    nl_nodes = []
    for b, zb in enumerate(z_blocks):
        g, _ = _pair_force(zb, masses[b], a, guard)
        nl_nodes.append(g)
    if include_coupling:
        gh, _ = _coupling_terms(z_blocks, s, plan, family, a, guard)
    else:
        gh = [np.zeros_like(zb) for zb in z_blocks]

    qf = _quad_factors(path, plan)
    modes = path.modes.astype(float)
    out = []
    for b, c in enumerate(path.coeffs):
        cb, pref = qf[b]
        m = masses[b]
        quad = ((cb * modes + 1.0) ** 2)[:, None] * (m[None, :] * c)
        nl = _to_modes(nl_nodes[b], L)
        g = pref * (quad + nl) + _to_modes(gh[b], L)
        if preconditioned:
            g = g / (1.0 + modes**2)[:, None]
        if project:
            w = m / np.sum(m * m)
            g = g - np.outer(g @ m, w)
        out.append(g)
    return FourierPath(L, out)


def discrete_action(path: FourierPath, plan: CarouselPlan, family: CarouselFamily, include_coupling: bool = True, oversample: int = 4) -> float:
    """The discretized action whose exact coefficient gradient is
    2 pi times the unpreconditioned, unprojected action gradient."""
    a = plan.alpha.value
    masses = _block_masses(family)
    L = path.L
    s = _nodes(L, oversample)
    nnode = len(s)
    z_blocks = [_to_nodes(c, nnode) for c in path.coeffs]
    scale = max(max(float(np.abs(z).max()) for z in z_blocks), 1.0)
    guard = 1e-12 * scale
    qf = _quad_factors(path, plan)
    modes = path.modes.astype(float)
    total = 0.0
    for b, c in enumerate(path.coeffs):
        cb, pref = qf[b]
        m = masses[b]
        q = (cb * modes + 1.0) ** 2
        kin = float(np.sum(q[:, None] * m[None, :] * np.abs(c) ** 2))
        _, pot = _pair_force(z_blocks[b], m, a, guard)
        total += pref * (math.pi * kin + 2.0 * math.pi * float(pot.mean()))
    if include_coupling:
        _, hval = _coupling_terms(z_blocks, s, plan, family, a, guard)
        total += 2.0 * math.pi * float(hval.mean())
    return total


# ---------------------------------------------------------------------------
# packing between FourierPath and real Newton unknowns (reduced coordinates)
# ---------------------------------------------------------------------------


class _Packing:
    def __init__(self, family: CarouselFamily, L: int):
        self.L = L
        self.bases = [_reduced_basis_c(m) for m in _block_masses(family)]
        self.dims = [b.shape[1] for b in self.bases]
        self.block_sizes = [2 * (2 * L + 1) * d for d in self.dims]
        self.size = sum(self.block_sizes)

    def reduce(self, path: FourierPath) -> np.ndarray:
        segs = []
        for c, B in zip(path.coeffs, self.bases):
            w = c @ np.conj(B)
            segs.append(np.concatenate([w.real.ravel(), w.imag.ravel()]))
        return np.concatenate(segs)

    def expand(self, vec: np.ndarray) -> FourierPath:
        out = []
        off = 0
        n_modes = 2 * self.L + 1
        for B, d, sz in zip(self.bases, self.dims, self.block_sizes):
            seg = vec[off : off + sz]
            off += sz
            half = sz // 2
            w = (seg[:half] + 1j * seg[half:]).reshape(n_modes, d)
            out.append(w @ B.T)
        return FourierPath(self.L, out)


@dataclass
class RefineOpts:
    tol: float = 1e-10
    max_iter: int = 60
    L: int = 32
    max_L: int = 128
    include_coupling: bool = True
    lock_cluster_phases: bool = True
    fd_step: float = 1e-7
    verbose: bool = False


@dataclass
class RefineReport:
    residual_history: list = field(default_factory=list)
    grad_norm: float = math.inf
    scaled_norm: float = math.inf
    iterations: int = 0
    condition: float = math.nan
    phase_conditions: list = field(default_factory=list)
    tail_energy: float = math.nan
    L: int = 0
    converged: bool = False


def _row_scaling(pack: _Packing, plan: CarouselPlan) -> np.ndarray:
    """Left scaling of the gradient equations that makes the limiting
    operator order one: nu^-2 on the nonzero modes of u_0 and
    r_j^(alpha-1) on the cluster blocks."""
    a = plan.alpha.value
    L = pack.L
    n_modes = 2 * L + 1
    segs = []
    modes = np.arange(-L, L + 1)
    w0 = np.where(modes == 0, 1.0, plan.nu**-2)
    for b, d in enumerate(pack.dims):
        if b == 0:
            w = np.repeat(w0[:, None], d, axis=1).ravel()
        else:
            w = np.full(n_modes * d, plan.radii[b - 1] ** (a - 1.0))
        segs.append(np.concatenate([w, w]))
    return np.concatenate(segs)


def refine_orbit(init: FourierPath, plan: CarouselPlan, family: CarouselFamily, opts: RefineOpts | None = None):
    """Damped bordered Newton solve of the projected-gradient equations.

    Returns (refined FourierPath, RefineReport).  Converges when the
    unscaled projected-gradient norm drops below opts.tol; doubles the
    truncation and re-solves when the tail coefficients stay above
    1e-10 of the path norm.
    """
    opts = opts or RefineOpts()
    path = init if init.L == opts.L else init.resize(opts.L)
    while True:
        refined, report = _refine_fixed_L(path, plan, family, opts)
        tail = refined.tail_energy()
        report.tail_energy = tail
        report.L = refined.L
        if tail <= 1e-10 or refined.L >= opts.max_L:
            if tail > 1e-10:
                warnings.warn(f"tail energy {tail:.2e} above threshold at L = {refined.L}")
            return refined, report
        path = refined.resize(min(2 * refined.L, opts.max_L))


def _refine_fixed_L(init: FourierPath, plan: CarouselPlan, family: CarouselFamily, opts: RefineOpts):
    pack = _Packing(family, init.L)
    scaling = _row_scaling(pack, plan)
    w0 = pack.reduce(init)

    def grad_vec(w):
        p = pack.expand(w)
        g = action_gradient(p, plan, family, include_coupling=opts.include_coupling)
        return pack.reduce(g)

    # phase directions: the diagonal-rotation generator i*z along the whole
    # init path, and per-cluster rotation generators on the mode-0 block
    borders = []
    labels = []
    gen_H = pack.reduce(FourierPath(init.L, [1j * c for c in init.coeffs]))
    n = np.linalg.norm(gen_H)
    if n > 0:
        borders.append(gen_H / n)
        labels.append("diagonal rotation (H generator), L2 pairing")
    cluster_rows = []
    for j in range(1, family.n0 + 1):
        coeffs = [np.zeros_like(c) for c in init.coeffs]
        coeffs[j][init.L] = 1j * init.coeffs[j][init.L]
        row = pack.reduce(FourierPath(init.L, coeffs))
        nr = np.linalg.norm(row)
        if nr > 0:
            cluster_rows.append(row / nr)
            labels.append(f"cluster {j} phase lock <u_j - init_j, J a_j>, L2 pairing")
    report = RefineReport(phase_conditions=labels)

    w = w0.copy()
    g = grad_vec(w)
    gnorm = np.linalg.norm(g)
    snorm = np.linalg.norm(scaling * g)
    report.residual_history.append(gnorm)

    def newton_pass(w, g, gnorm, snorm, rows, max_iter):
        nb = len(rows)
        D = pack.size
        it = 0
        while gnorm > opts.tol and it < max_iter:
            gs = scaling * g
            J = np.empty((D, D))
            base = gs
            for col in range(D):
                h = opts.fd_step * max(1.0, abs(w[col]))
                wp = w.copy()
                wp[col] += h
                J[:, col] = (scaling * grad_vec(wp) - base) / h
            A = np.zeros((D + nb, D + nb))
            A[:D, :D] = J
            rhs = np.zeros(D + nb)
            rhs[:D] = -gs
            for i, r in enumerate(rows):
                A[:D, D + i] = r
                A[D + i, :D] = r
                rhs[D + i] = -float(r @ (w - w0))
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(f"rank-deficient bordered system: {exc}") from exc
            report.condition = float(np.linalg.cond(A))
            step = sol[:D]
            lam = 1.0
            for _ in range(25):
                wt = w + lam * step
                try:
                    gt = grad_vec(wt)
                except CollisionError:
                    lam *= 0.5
                    continue
                if np.linalg.norm(scaling * gt) < snorm * (1.0 - 1e-4 * lam) or lam < 1e-4:
                    break
                lam *= 0.5
            else:
                raise ConvergenceError("line search failed to reduce the residual")
            w = w + lam * step
            g = gt
            gnorm = np.linalg.norm(g)
            snorm = np.linalg.norm(scaling * g)
            it += 1
            report.residual_history.append(gnorm)
            report.iterations += 1
            if opts.verbose:
                print(f"  newton({nb} borders) it={report.iterations} |g|={gnorm:.3e} scaled={snorm:.3e} lam={lam:g}")
        return w, g, gnorm, snorm

    rows = borders + (cluster_rows if opts.lock_cluster_phases else [])
    w, g, gnorm, snorm = newton_pass(w, g, gnorm, snorm, rows, opts.max_iter)
    if opts.lock_cluster_phases and cluster_rows and gnorm > opts.tol:
        # release the cluster locks: the locked solve parked us next to the
        # true critical point; finish on the genuine equations
        w, g, gnorm, snorm = newton_pass(w, g, gnorm, snorm, borders, opts.max_iter)
    report.grad_norm = float(gnorm)
    report.scaled_norm = float(snorm)
    report.converged = gnorm <= opts.tol
    if not report.converged:
        raise ConvergenceError(f"refinement stalled at |grad| = {gnorm:.3e} after {report.iterations} iterations")
    return pack.expand(w), report


# ---------------------------------------------------------------------------
# back to the inertial frame
# ---------------------------------------------------------------------------


def _rotor_angles(plan: CarouselPlan, t: float):
    """(base angle, cluster angles, s) with exact winding reduction for
    rational plans."""
    if plan.rational:
        p, q = plan.rational
        tau = t / plan.period
        base = 2.0 * math.pi * math.fmod(q * tau, 1.0)
        cl = [2.0 * math.pi * math.fmod((q + pj * p) * tau, 1.0) for pj in plan.p_list]
        s = 2.0 * math.pi * math.fmod(p * tau, 1.0)
    else:
        base = t
        cl = [w * t for w in plan.omega]
        s = plan.nu * t
    return base, cl, s


def to_inertial(path: FourierPath, plan: CarouselPlan, t: float) -> PhaseState:
    """Evaluate q_{j,k}(t) = exp(tJ) u_{0,j}(nu t) + r_j exp(w_j t J) u_{j,k}(nu t)
    and its chain-rule velocity."""
    base, cl, s = _rotor_angles(plan, t)
    dpath = path.deriv()
    z0 = path.eval_at(0, s)
    dz0 = dpath.eval_at(0, s)
    e0 = np.exp(1j * base)
    pos = [e0 * z0]
    vel = [e0 * (1j * z0 + plan.nu * dz0)]
    for j in range(1, path.n_blocks):
        zj = path.eval_at(j, s)
        dzj = dpath.eval_at(j, s)
        ej = plan.radii[j - 1] * np.exp(1j * cl[j - 1])
        w = plan.omega[j - 1]
        pos.append(pos[0][j - 1] + ej * zj)
        vel.append(vel[0][j - 1] + ej * (1j * w * zj + plan.nu * dzj))
    n0 = path.n_blocks - 1
    zs = []
    vs = []
    for j in range(1, len(z0) + 1):
        if j <= n0:
            zs.append(pos[j])
            vs.append(vel[j])
        else:
            zs.append(pos[0][j - 1 : j])
            vs.append(vel[0][j - 1 : j])
    z = np.concatenate(zs)
    v = np.concatenate(vs)
    return PhaseState(np.stack([z.real, z.imag], -1), np.stack([v.real, v.imag], -1), t)


def inertial_residual(path: FourierPath, plan: CarouselPlan, family: CarouselFamily, n_samples: int = 64) -> float:
    """Pointwise N-body residual max_i m_i |qdd_i - a_i(q)| along the path,
    with qdd by spectral differentiation of the carousel representation."""
    from . import backends

    a = plan.alpha.value
    d1 = path.deriv(1)
    d2 = path.deriv(2)
    n0 = path.n_blocks - 1
    masses = np.concatenate([family.clusters[j - 1].masses if j <= n0 else family.base.masses[j - 1 : j] for j in range(1, family.n + 1)])
    T = plan.period if plan.rational else 2.0 * math.pi
    worst = 0.0
    for t in np.linspace(0.0, T, n_samples, endpoint=False):
        base, cl, s = _rotor_angles(plan, t)
        z0 = path.eval_at(0, s)
        dz0 = d1.eval_at(0, s)
        ddz0 = d2.eval_at(0, s)
        e0 = np.exp(1j * base)
        acc0 = e0 * (-z0 + 2j * plan.nu * dz0 + plan.nu**2 * ddz0)
        pos_state = to_inertial(path, plan, t)
        acc = backends.accel(pos_state.positions, masses, a)
        acc_c = acc[:, 0] + 1j * acc[:, 1]
        qdd = []
        for j in range(1, family.n + 1):
            if j <= n0:
                zj = path.eval_at(j, s)
                dzj = d1.eval_at(j, s)
                ddzj = d2.eval_at(j, s)
                w = plan.omega[j - 1]
                ej = plan.radii[j - 1] * np.exp(1j * cl[j - 1])
                qdd.append(acc0[j - 1] + ej * (-(w**2) * zj + 2j * w * plan.nu * dzj + plan.nu**2 * ddzj))
            else:
                qdd.append(acc0[j - 1 : j])
        qdd = np.concatenate(qdd)
        worst = max(worst, float(np.max(masses * np.abs(qdd - acc_c))))
    return worst
