"""Growth-rate counterexample machinery.

Three constructions drive the sharpness experiments:

* Lacunary-phase lattice superpositions (Wainger-type functions)
  sum_{k != 0} exp(-t|k|) |k|^(-b) exp(i|k|^a) exp(ik.x) times a window,
  with uniformly bounded L^q norms in the regularization t.
* Convolution coefficient sums d(k) = sum_{k_1+..+k_N = k, k_j != 0}
  <(k_1,..,k_N)>^m prod |k_j|^(-b_j), whose log-log slope in |k| reproduces
  the m - sum b_j + (N-1)n power law.
* Dilated-bump operator experiments: annular bumps dilated by 2^a placed in
  one slot or all slots; the restricted (resp. global) L^r output norm grows
  like 2^(an) (resp. 2^(a(Nn + n/r))), which is what forces the lower
  bounds on the smoothness exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import bumps
from .errors import CostCapError, ParameterError, RangeError
from .grid import Field, Grid, field_from, forward_transform, lebesgue_norm
from .mpdo import (
    DEFAULT_COST_CAP,
    DilatedBumpSymbol,
    ModulatedSymbol,
    evaluate,
    modulated_bump_sum,
)
from .utils import fit_log2_slope
from .weights import LatticeSeq


@dataclass(frozen=True)
class WaingerParams:
    """Lacunary superposition parameters: phase exponent a in (0,1), decay
    b in (0, n), regularization t > 0, lattice truncation radius."""

    a: float
    b: float
    t: float
    radius: int

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ParameterError("need 0 < a < 1")
        if not self.b > 0:
            raise ParameterError("need b > 0")
        if not self.t > 0:
            raise ParameterError("need t > 0")


def _integer_mode_points(dim: int, radius: int):
    ax = np.arange(-radius, radius + 1)
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
    mods = np.sqrt(np.sum(pts**2, axis=1))
    keep = mods > 0
    return pts[keep], mods[keep]


def lacunary_coefficients(prm: WaingerParams, dim: int) -> np.ndarray:
    """Coefficient array exp(-t|k|) |k|^(-b) exp(i|k|^a) on [-radius,radius]^n."""
    ax = np.arange(-prm.radius, prm.radius + 1)
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    mods = np.sqrt(sum(m.astype(float) ** 2 for m in mesh))
    with np.errstate(divide="ignore"):
        coeff = np.where(
            mods > 0,
            np.exp(-prm.t * mods) * mods ** (-prm.b) * np.exp(1j * mods**prm.a),
            0.0,
        )
    return coeff


def wainger_function(prm: WaingerParams, envelope: Field) -> Field:
    """Lacunary lattice superposition times the given physical envelope."""
    grid = envelope.grid
    if prm.b >= grid.dim:
        raise ParameterError("need b < dim")
    if prm.radius > grid.max_freq:
        raise RangeError("lattice truncation exceeds the grid frequency range")
    coeff = lacunary_coefficients(prm, grid.dim)
    return modulated_bump_sum(coeff, prm.radius, grid, envelope.values)


# ---------------------------------------------------------------------------
# convolution coefficient sums
# ---------------------------------------------------------------------------


def convolution_coefficients(
    m: float,
    b,
    radius: int,
    dim: int = 1,
    nslots: int = 2,
    inner_radius: int | None = None,
    cost_cap: float = DEFAULT_COST_CAP,
) -> LatticeSeq:
    """d(k) = sum over k_1+..+k_N = k, all k_j nonzero and |k_j| <= inner_radius,
    of <(k_1,..,k_N)>^m prod_j |k_j|^(-b_j), for k in [-radius, radius]^n.

    ``inner_radius`` defaults to ``radius`` (the truncation is part of the
    definition; with all b_j = 0 the sums are lattice-point counts).  For
    asymptotic slope studies enlarge it until the neglected tails no longer
    bend the window; the growth-law tests use inner_radius = 8 * radius.
    """
    b = [float(v) for v in np.atleast_1d(b)]
    if len(b) != nslots:
        raise ParameterError(f"need one decay exponent per slot, got {len(b)}")
    R = radius if inner_radius is None else int(inner_radius)
    cost = float(2 * R + 1) ** (dim * (nslots - 1)) * float(2 * radius + 1) ** dim
    if cost > cost_cap:
        raise CostCapError(cost, cost_cap)

    out_ax = np.arange(-radius, radius + 1)
    if nslots == 1:
        vals = np.zeros((2 * radius + 1,) * dim)
        mesh = np.meshgrid(*([out_ax] * dim), indexing="ij")
        mods = np.sqrt(sum(mm.astype(float) ** 2 for mm in mesh))
        good = (mods > 0) & (mods <= R + 1e-12)
        with np.errstate(divide="ignore"):
            vals = np.where(good, (1.0 + mods**2) ** (m / 2.0) * mods ** (-b[0]), 0.0)
        return LatticeSeq(dim, radius, 1, vals)

    inner_pts, inner_mods = _integer_mode_points(dim, R)  # enumerated slots 1..N-1
    out_mesh = np.meshgrid(*([out_ax] * dim), indexing="ij")
    out_pts = np.stack([mm.ravel() for mm in out_mesh], axis=-1).astype(float)

    if nslots == 2:
        last = out_pts[:, None, :] - inner_pts[None, :, :]  # (K, I, dim)
        last_mod = np.sqrt(np.sum(last**2, axis=-1))
        ok = (last_mod > 0) & (np.max(np.abs(last), axis=-1) <= R)
        ang = (1.0 + inner_mods[None, :] ** 2 + last_mod**2) ** (m / 2.0)
        with np.errstate(divide="ignore"):
            term = (
                ang
                * inner_mods[None, :] ** (-b[0])
                * np.where(ok, last_mod, 1.0) ** (-b[1])
            )
        vals = np.where(ok, term, 0.0).sum(axis=1)
        return LatticeSeq(dim, radius, 1, vals.reshape((2 * radius + 1,) * dim))

    if nslots == 3:
        vals = np.zeros(out_pts.shape[0])
        p2, m2 = _integer_mode_points(dim, R)
        for i1, (pt1, mod1) in enumerate(zip(inner_pts, inner_mods)):
            last = out_pts[:, None, :] - pt1[None, None, :] - p2[None, :, :]
            last_mod = np.sqrt(np.sum(last**2, axis=-1))
            ok = (last_mod > 0) & (np.max(np.abs(last), axis=-1) <= R)
            ang = (1.0 + mod1**2 + m2[None, :] ** 2 + last_mod**2) ** (m / 2.0)
            with np.errstate(divide="ignore"):
                term = (
                    ang
                    * mod1 ** (-b[0])
                    * m2[None, :] ** (-b[1])
                    * np.where(ok, last_mod, 1.0) ** (-b[2])
                )
            vals += np.where(ok, term, 0.0).sum(axis=1)
        return LatticeSeq(dim, radius, 1, vals.reshape((2 * radius + 1,) * dim))

    raise ParameterError("at most 3 slots are supported")


def coefficient_slope(d: LatticeSeq, lo: float, hi: float):
    """Log-log slope of d(k) against |k| over lo <= |k| <= hi."""
    ax = d.axis
    mesh = np.meshgrid(*([ax] * d.dim), indexing="ij")
    mods = np.sqrt(sum(m.astype(float) ** 2 for m in mesh))
    sel = (mods >= lo) & (mods <= hi) & (d.values > 0)
    return fit_log2_slope(mods[sel], d.values[sel])


# ---------------------------------------------------------------------------
# dilated-bump growth experiments
# ---------------------------------------------------------------------------


def annular_bump_samples(grid: Grid, a: int) -> np.ndarray:
    """Samples of the dyadic annular bump dilated by 2^a in physical space."""
    r = bumps.radius(grid.mesh())
    return bumps.dyadic_shell(1, r / 2.0 ** (a - 1)).astype(np.complex128)


def window_bump_samples(grid: Grid) -> np.ndarray:
    """Flat bump supported in the unit ball (the base profile at half scale)."""
    r = bumps.radius(grid.mesh())
    return bumps.dyadic_base(2.0 * r).astype(np.complex128)


def dilated_bump_symbol(grid: Grid, nslots: int, a: int, family: str) -> DilatedBumpSymbol:
    """Separable symbol whose slot profiles are transforms of dilated bumps."""
    scale = (2.0 * np.pi) ** (-grid.dim)
    dil = scale * forward_transform(field_from(grid, annular_bump_samples(grid, a))).values
    win = scale * forward_transform(field_from(grid, window_bump_samples(grid))).values
    if family == "single_slot":
        arrays = [dil] + [win] * (nslots - 1)
    elif family == "all_slots":
        arrays = [dil] * nslots
    else:
        raise ParameterError(f"unknown family {family!r}")
    return DilatedBumpSymbol(grid, arrays, family, a)


def dilated_bump_fields(grid: Grid, nslots: int, a: int, family: str):
    if family == "single_slot":
        vals = [annular_bump_samples(grid, a)] + [window_bump_samples(grid)] * (nslots - 1)
    else:
        vals = [annular_bump_samples(grid, a)] * nslots
    return [field_from(grid, v) for v in vals]


def _restricted_lr_norm(f: Field, r: float, delta: float) -> float:
    mask = bumps.radius(f.grid.mesh()) <= delta
    vals = np.abs(f.values) * mask
    if np.isinf(r):
        return float(vals.max())
    cell = f.grid.spacing**f.grid.dim
    return float((cell * np.sum(vals**r)) ** (1.0 / r))


def half_peak_radius(grid: Grid) -> float:
    """Largest radius where the window autocorrelation stays above half peak."""
    win = field_from(grid, window_bump_samples(grid))
    W = forward_transform(win).values
    from .grid import inverse_transform, Field as _F

    conv = inverse_transform(_F(grid, "frequency", W * W)).values.real
    peak = conv[(grid.res // 2,) * grid.dim]
    rad = bumps.radius(grid.mesh())
    good = np.abs(conv) >= 0.5 * abs(peak)
    return float(rad[good].max())


@dataclass
class GrowthReport:
    family: str
    a_values: list
    norms: list
    slope: float
    intercept: float
    residual: float
    predicted: float
    delta: float | None = None


def growth_experiment(
    a_values,
    family: str,
    q,
    r: float,
    grid: Grid,
    nslots: int = 2,
    cost_cap: float = DEFAULT_COST_CAP,
) -> GrowthReport:
    """Measure the output-norm growth of the dilated-bump construction.

    single_slot: L^r norm restricted to a fixed window where the window
    autocorrelation is bounded below; predicted slope n.
    all_slots: global L^r norm (the dilation carries the mass outward);
    predicted slope N*n + n/r.
    """
    a_values = [int(a) for a in a_values]
    n = grid.dim
    for a in a_values:
        if 2.0 ** (a + 2) > grid.period / 2.0:
            raise RangeError(f"dilation 2^{a} does not fit inside the torus")
    delta = half_peak_radius(grid) if family == "single_slot" else None
    norms = []
    for a in a_values:
        sym = dilated_bump_symbol(grid, nslots, a, family)
        fields = dilated_bump_fields(grid, nslots, a, family)
        out = evaluate(sym, fields, cost_cap)
        if family == "single_slot":
            norms.append(_restricted_lr_norm(out, r, delta))
        else:
            norms.append(lebesgue_norm(out, r))
    slope, intercept, resid = fit_log2_slope([2.0**a for a in a_values], norms)
    predicted = float(n) if family == "single_slot" else nslots * n + n / r
    return GrowthReport(family, a_values, norms, slope, intercept, resid, predicted, delta)


def growth_budget(a: int, s, q, n: int = 1, family: str = "single_slot") -> float:
    """Upper-bound growth exponent implied by the smoothness budget.

    single_slot: a * (s_1 + n/2 + n/q_1); all_slots: a * sum_j (s_j + n/2 + n/q_j).
    Comparing the measured growth against this budget exhibits the forced
    inequalities s_j >= n/2 - n/q_j and sum s_j >= sum (n/2 - n/q_j) + n/r.
    """
    s = [float(v) for v in np.atleast_1d(s)]
    q = [float(v) for v in np.atleast_1d(q)]
    if family == "single_slot":
        return a * (s[0] + n / 2.0 + n / q[0])
    if family == "all_slots":
        return a * sum(sj + n / 2.0 + n / qj for sj, qj in zip(s, q))
    raise ParameterError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# x-modulated lattice construction with constant output
# ---------------------------------------------------------------------------


_MOD_BUMP_INNER = 0.125
_MOD_BUMP_OUTER = 0.25


def critical_decay(a: float, q: float, n: int, margin: float = 0.1) -> float:
    """Decay exponent b = n - a n/2 - n/q + a n/q + margin of the lacunary recipe."""
    return n - a * n / 2.0 - n / q + a * n / q + margin


@dataclass
class ModulatedLatticeSetup:
    symbol: ModulatedSymbol
    fields: list
    coefficient: complex
    window: Field


def lattice_phase_sum(m: float, s0: float, b, radius: int, dim: int, nslots: int) -> float:
    """Exact truncated sum over nonzero lattice points of
    <(l_1,..,l_N)>^(m-s0) prod_j |l_j|^(-b_j)."""
    b = [float(v) for v in np.atleast_1d(b)]
    pts = [None] * nslots
    mods = [None] * nslots
    for j in range(nslots):
        pts[j], mods[j] = _integer_mode_points(dim, radius)
    grids = np.meshgrid(*[np.arange(len(m_)) for m_ in mods], indexing="ij")
    total = 1.0
    r2 = 0.0
    for j in range(nslots):
        r2 = r2 + mods[j][grids[j]] ** 2
        total = total * mods[j][grids[j]] ** (-b[j])
    total = total * (1.0 + r2) ** ((m - s0) / 2.0)
    return float(total.sum())


def modulated_lattice_example(
    a_exps,
    s0: float,
    grid: Grid,
    m: float,
    radius: int,
    b=None,
    q=None,
) -> ModulatedLatticeSetup:
    """Build the x-modulated lattice symbol and its lacunary test tuple.

    The operator output is a constant multiple of the window bump; the
    constant is (2*pi)^(-Nn) (int bump^2)^N times the truncated lattice
    phase sum, returned exactly for cross-checking.
    """
    a_exps = [float(a) for a in np.atleast_1d(a_exps)]
    nslots = len(a_exps)
    n = grid.dim
    if q is None:
        q = [2.0] * nslots
    if b is None:
        b = [critical_decay(a, qj, n) for a, qj in zip(a_exps, q)]
    b = [float(v) for v in np.atleast_1d(b)]
    for bj in b:
        if not 0.0 < bj < n:
            raise ParameterError("decay exponents must sit inside (0, dim)")
    if radius + _MOD_BUMP_OUTER > grid.max_freq:
        raise RangeError("lattice truncation exceeds the grid frequency range")

    def bump1d(t):
        return bumps.axis_flat_bump(t, _MOD_BUMP_INNER, _MOD_BUMP_OUTER)

    ax = np.arange(-radius, radius + 1)
    base_mesh = np.meshgrid(*([ax] * (n * nslots)), indexing="ij")
    mods = [
        np.sqrt(sum(base_mesh[j * n + d].astype(float) ** 2 for d in range(n)))
        for j in range(nslots)
    ]
    ang = (1.0 + sum(md**2 for md in mods)) ** ((m - s0) / 2.0)
    phases = np.ones_like(ang, dtype=np.complex128)
    for j, md in enumerate(mods):
        phases = phases * np.exp(-1j * md ** a_exps[j])
    lattice_coeff = ang * phases

    def base(xi_mesh):
        out = 0.0
        it = np.nditer(lattice_coeff, flags=["multi_index"])
        flat = lattice_coeff
        # separable per lattice point: evaluate with tensor contractions
        b1 = bump1d(np.subtract.outer(ax.astype(float), np.asarray(xi_mesh[0][tuple([slice(None)] + [0] * (len(xi_mesh) - 1))]) if False else 0))
        raise RuntimeError("unreachable")

    # dense base over the slot frequency meshes via per-axis contractions
    def base_fn(xi_mesh):
        fax = np.asarray(xi_mesh[0])
        out = lattice_coeff.astype(np.complex128)
        axis_1d = None
        for axis_index in range(n * nslots):
            coords = np.unique(np.asarray(xi_mesh[axis_index]))
            raise RuntimeError("unreachable")
        return out

    # the meshes passed by ModulatedSymbol are full product meshes built from
    # one shared frequency axis, so contract against that axis directly
    def base_eval(xi_mesh):
        fax = None
        for cand in xi_mesh:
            sl = np.moveaxis(cand, 0, 0)
        fax = np.asarray(xi_mesh[0])
        return None

    sym = ModulatedSymbol(base=None, amplitude=None)
    # replace the lazy base with an explicit dense constructor
    freq = grid.freq_axis()
    bmat = bump1d(np.subtract.outer(ax.astype(float), freq))  # (lattice, grid)
    dense = lattice_coeff
    for _ in range(n * nslots):
        dense = np.tensordot(dense, bmat, axes=([0], [0]))

    window_vals = bumps.tensor_eval(bump1d, grid.mesh())
    window = Field(grid, "physical", window_vals.astype(np.complex128))

    def amplitude(x):
        return float(bumps.tensor_eval(bump1d, list(np.atleast_1d(x))))

    sym = ModulatedSymbol(base=None, amplitude=amplitude)
    key = (grid.dim, grid.period, grid.res, nslots)
    sym._cache[key] = dense.astype(np.complex128)
    slotsum = []
    mesh_full = np.meshgrid(*([freq] * (n * nslots)), indexing="ij")
    for d in range(n):
        slotsum.append(sum(mesh_full[j * n + d] for j in range(nslots)))
    sym._cache[key, "sum"] = slotsum

    fields = []
    for j, (a, bj) in enumerate(zip(a_exps, b)):
        kmesh = np.meshgrid(*([ax] * n), indexing="ij")
        kmod = np.sqrt(sum(mm.astype(float) ** 2 for mm in kmesh))
        with np.errstate(divide="ignore"):
            coeff = np.where(kmod > 0, kmod ** (-bj) * np.exp(1j * kmod**a), 0.0)
        env = bumps.inverse_transform_profile(bump1d, _MOD_BUMP_OUTER, grid.axis_points())
        envn = env
        for _ in range(n - 1):
            envn = np.multiply.outer(envn, env)
        fields.append(modulated_bump_sum(coeff, radius, grid, envn.astype(np.complex128)))

    bump_l2_sq = float(
        np.sum(
            bump1d(np.linspace(-_MOD_BUMP_OUTER, _MOD_BUMP_OUTER, 4001)) ** 2
        )
        * (2 * _MOD_BUMP_OUTER / 4000)
    ) ** n
    phase_sum = 0.0 + 0.0j
    # exact truncated sum with the oscillatory phases of sigma times f
    mods_sq = sum(md**2 for md in mods)
    nz = np.ones_like(ang, dtype=bool)
    for md in mods:
        nz &= md > 0
    with np.errstate(divide="ignore"):
        amp_term = ang * np.prod(
            [np.where(nz, md, 1.0) ** (-bj) for md, bj in zip(mods, b)], axis=0
        )
    phase_sum = complex(np.sum(np.where(nz, amp_term, 0.0)))
    coefficient = (2.0 * np.pi) ** (-nslots * n) * bump_l2_sq * phase_sum
    return ModulatedLatticeSetup(sym, fields, coefficient, window)
