"""The multilinear operator: symbols, evaluation, and boundedness experiments.

The operator acts on N fields over one grid through the frequency-lattice
quadrature

    T(x_p) = L^{-Nn} sum_{k_1..k_N} sigma(x_p, xi_{k_1}, .., xi_{k_N})
             exp(i x_p.(xi_{k_1}+..+xi_{k_N})) prod_j Fhat_j(xi_{k_j}),

the Riemann-sum form of the continuum definition with the toolkit's
transform normalization.  Symbols are tagged analytic descriptions, so they
can be sampled lazily per output point (x-dependent case) or resampled on
aligned product grids for norm diagnostics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import bumps
from .errors import CostCapError, ParameterError, RangeError, ShapeError
from .grid import (
    Field,
    Grid,
    field_from,
    forward_transform,
    inverse_transform,
    random_band_limited,
)
from .norms import AmalgamParams, amalgam_norm, symbol_l2ul_norm
from .utils import rng_for
from .weights import LatticeSeq, lattice_output_coefficients

DEFAULT_COST_CAP = 2.0e8


# ---------------------------------------------------------------------------
# symbol specifications
# ---------------------------------------------------------------------------


class SymbolSpec:
    """Tagged description of a symbol sigma(x, xi_1, .., xi_N)."""

    x_independent = False
    separable = False

    def xi_values(self, grid: Grid, nslots: int) -> np.ndarray:
        """Dense samples over the slot frequency meshes (x-independent only)."""
        raise ParameterError("symbol is x-dependent; sample per x instead")

    def x_slice(self, x: np.ndarray, grid: Grid, nslots: int) -> np.ndarray:
        """Samples at one physical point x over the slot frequency meshes."""
        if self.x_independent:
            return self.xi_values(grid, nslots)
        raise NotImplementedError

    def profiles(self, grid: Grid, nslots: int):
        """Per-slot multiplier samples (separable x-independent only)."""
        raise ParameterError("symbol is not separable")

    def product_values(self, grid_x: Grid, grid_xi: Grid, nslots: int) -> np.ndarray:
        """Dense samples on the product grid (x axes first, then slot axes)."""
        if self.x_independent:
            vals = self.xi_values(grid_xi, nslots)
            return np.broadcast_to(vals, grid_x.shape + vals.shape).copy()
        out = np.empty(grid_x.shape + grid_xi.shape * nslots, dtype=np.complex128)
        pts = np.stack([m.ravel() for m in grid_x.mesh()], axis=-1)
        for i, x in enumerate(pts):
            out.reshape((-1,) + grid_xi.shape * nslots)[i] = self.x_slice(
                x, grid_xi, nslots
            )
        return out


class ConstantSymbol(SymbolSpec):
    x_independent = True
    separable = True

    def __init__(self, c: complex = 1.0):
        self.c = complex(c)

    def xi_values(self, grid, nslots):
        shape = grid.shape * nslots
        return np.full(shape, self.c, dtype=np.complex128)

    def profiles(self, grid, nslots):
        out = [np.ones(grid.shape, dtype=np.complex128) for _ in range(nslots)]
        out[0] = out[0] * self.c
        return out


class SeparableSymbol(SymbolSpec):
    """sigma(xi_1..xi_N) = prod_j m_j(xi_j) from per-slot profile callables."""

    x_independent = True
    separable = True

    def __init__(self, profile_fns):
        self.profile_fns = list(profile_fns)

    def profiles(self, grid, nslots):
        if nslots != len(self.profile_fns):
            raise ShapeError(f"symbol has {len(self.profile_fns)} slots, asked {nslots}")
        mesh = grid.freq_mesh()
        return [np.asarray(fn(mesh), dtype=np.complex128) for fn in self.profile_fns]

    def xi_values(self, grid, nslots):
        profs = self.profiles(grid, nslots)
        out = profs[0]
        for p in profs[1:]:
            out = np.multiply.outer(out, p)
        return out


class GridSeparableSymbol(SeparableSymbol):
    """Separable symbol given by per-slot sample arrays pinned to one grid."""

    def __init__(self, grid: Grid, arrays):
        self.grid = grid
        self.arrays = [np.asarray(a, dtype=np.complex128) for a in arrays]
        super().__init__([None] * len(self.arrays))

    def profiles(self, grid, nslots):
        if grid != self.grid:
            raise ShapeError("sampled separable symbol is pinned to its build grid")
        if nslots != len(self.arrays):
            raise ShapeError("slot count mismatch")
        return [a.copy() for a in self.arrays]


class DilatedBumpSymbol(GridSeparableSymbol):
    """Growth-experiment symbol: dilated annular bump in one or all slots."""

    def __init__(self, grid, arrays, family: str, a: int):
        super().__init__(grid, arrays)
        self.family = family
        self.a = a


class BandLimitedSymbol(SymbolSpec):
    """Random trigonometric polynomial with box-limited spectrum.

    The spectrum in x sits on the build grid's frequency lattice inside
    radius r0; the spectrum in each slot variable sits on a fixed mode
    lattice inside radius radii[j].  Coefficients are seeded Gaussians.
    """

    def __init__(self, grid: Grid, radii, r0: float = 0.0, seed: int = 0, xi_mode_spacing: float = 0.5):
        self.grid = grid
        self.r0 = float(r0)
        self.radii = [float(r) for r in radii]
        self.seed = int(seed)
        self.xi_mode_spacing = float(xi_mode_spacing)
        n = grid.dim
        self.xmodes = _lattice_ball(grid.freq_axis(), n, self.r0) if self.r0 > 0 else np.zeros((1, n))
        axis = self.xi_mode_spacing * np.arange(
            -int(max(self.radii) / self.xi_mode_spacing) - 1,
            int(max(self.radii) / self.xi_mode_spacing) + 2,
        )
        self.slot_modes = [_lattice_ball(axis, n, r) for r in self.radii]
        rng = rng_for(self.seed, 31)
        shape = (len(self.xmodes),) + tuple(len(m) for m in self.slot_modes)
        scale = 1.0 / math.sqrt(float(np.prod(shape)))
        self.coeff = scale * (
            rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        )
        self._cache = {}

    @property
    def x_independent(self):
        return self.r0 == 0.0

    def _xi_tensor(self, grid: Grid, nslots: int) -> np.ndarray:
        key = ("xi", grid.dim, grid.period, grid.res, nslots)
        if key not in self._cache:
            if nslots != len(self.slot_modes):
                raise ShapeError("slot count mismatch")
            out = self.coeff
            for modes in self.slot_modes:
                mesh = grid.freq_mesh()
                pts = np.stack([m.ravel() for m in mesh], axis=-1)
                e = np.exp(1j * (modes @ pts.T)).reshape((len(modes),) + grid.shape)
                out = np.tensordot(out, e, axes=([1], [0]))
            self._cache[key] = out  # (xmodes,) + slot grid axes
        return self._cache[key]

    def xi_values(self, grid, nslots):
        if not self.x_independent:
            raise ParameterError("symbol is x-dependent; sample per x instead")
        return self._xi_tensor(grid, nslots)[0]

    def x_slice(self, x, grid, nslots):
        tensor = self._xi_tensor(grid, nslots)
        phases = np.exp(1j * (self.xmodes @ np.atleast_1d(x)))
        return np.tensordot(phases, tensor, axes=([0], [0]))

    def product_values(self, grid_x, grid_xi, nslots):
        tensor = self._xi_tensor(grid_xi, nslots)
        pts = np.stack([m.ravel() for m in grid_x.mesh()], axis=-1)
        ex = np.exp(1j * (pts @ self.xmodes.T))  # (P, xmodes)
        out = np.tensordot(ex, tensor, axes=([1], [0]))
        return out.reshape(grid_x.shape + grid_xi.shape * nslots)


class LatticeSymbol(SymbolSpec):
    """sigma(xi) = sum_k V(k) prod_j bump(xi_j - k_j), bump flat on [-1/4,1/4]."""

    x_independent = True

    def __init__(self, V: LatticeSeq, inner: float = 0.25, outer: float = 0.5):
        self.V = V
        self.inner = float(inner)
        self.outer = float(outer)

    def bump1d(self, t):
        return bumps.axis_flat_bump(t, self.inner, self.outer)

    def xi_values(self, grid, nslots):
        V = self.V
        if nslots != V.blocks:
            raise ShapeError("slot count mismatch")
        if V.radius + self.outer > grid.max_freq:
            raise RangeError("lattice truncation exceeds the grid frequency range")
        fax = grid.freq_axis()
        b = self.bump1d(np.subtract.outer(V.axis.astype(float), fax))  # (lattice, grid)
        out = V.values.astype(np.complex128)
        for _ in range(V.dim * V.blocks):
            out = np.tensordot(out, b, axes=([0], [0]))
        return out


class ModulatedSymbol(SymbolSpec):
    """sigma(x, xi) = amplitude(x) exp(-i x.(xi_1+..+xi_N)) base(xi)."""

    x_independent = False

    def __init__(self, base=None, amplitude=None):
        self.base = base
        self.amplitude = amplitude
        self._cache = {}

    def _base_mesh(self, grid: Grid, nslots: int):
        key = (grid.dim, grid.period, grid.res, nslots)
        if key not in self._cache:
            if self.base is None:
                self._cache[key] = np.ones(grid.shape * nslots, dtype=np.complex128)
            else:
                mesh = np.meshgrid(*([grid.freq_axis()] * (grid.dim * nslots)), indexing="ij")
                self._cache[key] = np.asarray(self.base(mesh), dtype=np.complex128)
            # slot-summed frequency, one mesh per axis dimension
            slotsum = []
            for d in range(grid.dim):
                mesh = np.meshgrid(*([grid.freq_axis()] * (grid.dim * nslots)), indexing="ij")
                slotsum.append(sum(mesh[j * grid.dim + d] for j in range(nslots)))
            self._cache[key, "sum"] = slotsum
        return self._cache[key], self._cache[key, "sum"]

    def x_slice(self, x, grid, nslots):
        base, slotsum = self._base_mesh(grid, nslots)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        phase = np.zeros(base.shape)
        for d in range(grid.dim):
            phase = phase + x[d] * slotsum[d]
        amp = 1.0 if self.amplitude is None else self.amplitude(x)
        return amp * np.exp(-1j * phase) * base


def _lattice_ball(axis: np.ndarray, dim: int, radius: float) -> np.ndarray:
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
    keep = np.sum(pts**2, axis=1) <= radius**2 + 1e-12
    return pts[keep]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _check_common_grid(fields):
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise ShapeError("all input fields must share one grid")
        if f.side != "physical":
            raise ParameterError("operator inputs are physical-side fields")
    return grid


def evaluate(sym: SymbolSpec, fields, cost_cap: float = DEFAULT_COST_CAP) -> Field:
    """Direct frequency-lattice quadrature of the multilinear operator."""
    grid = _check_common_grid(fields)
    nslots = len(fields)
    n = grid.dim
    cost = float(grid.npoints) ** (nslots + 1)
    if cost > cost_cap:
        raise CostCapError(cost, cost_cap)

    fhats = [forward_transform(f).values.ravel() for f in fields]
    xpts = np.stack([m.ravel() for m in grid.mesh()], axis=-1)  # (P, n)
    fpts = np.stack([m.ravel() for m in grid.freq_mesh()], axis=-1)  # (K, n)
    E = np.exp(1j * (xpts @ fpts.T))  # (P, K)
    U = [E * fh[None, :] for fh in fhats]
    K = grid.npoints
    scale = (1.0 / grid.period) ** (n * nslots)

    if sym.x_independent:
        sig = sym.xi_values(grid, nslots).reshape((K,) * nslots)
        out = _contract_xindep(sig, U)
    else:
        out = np.empty(grid.npoints, dtype=np.complex128)
        for p, x in enumerate(xpts):
            sig = sym.x_slice(x, grid, nslots).reshape((K,) * nslots)
            out[p] = _contract_point(sig, [u[p] for u in U])
    return Field(grid, "physical", (scale * out).reshape(grid.shape))


def _contract_xindep(sig, U):
    if len(U) == 1:
        return U[0] @ sig
    if len(U) == 2:
        return np.sum(U[0] * (U[1] @ sig.T), axis=1)
    if len(U) == 3:
        out = np.zeros(U[0].shape[0], dtype=np.complex128)
        for k3 in range(sig.shape[2]):
            out += U[2][:, k3] * np.sum(U[0] * (U[1] @ sig[:, :, k3].T), axis=1)
        return out
    raise ParameterError("at most 3 operator slots are supported")


def _contract_point(sig, us):
    if len(us) == 1:
        return us[0] @ sig
    if len(us) == 2:
        return us[0] @ (sig @ us[1])
    if len(us) == 3:
        return np.einsum("abc,a,b,c->", sig, *us)
    raise ParameterError("at most 3 operator slots are supported")


def evaluate_separable_fast(sym: SymbolSpec, fields) -> Field:
    """Fast path for separable x-independent symbols: prod_j m_j(D) f_j."""
    if not (sym.separable and sym.x_independent):
        raise ParameterError("fast path needs a separable x-independent symbol")
    grid = _check_common_grid(fields)
    profs = sym.profiles(grid, len(fields))
    out = np.ones(grid.shape, dtype=np.complex128)
    for prof, f in zip(profs, fields):
        F = forward_transform(f)
        F.values *= prof
        out *= inverse_transform(F).values
    return Field(grid, "physical", out)


# ---------------------------------------------------------------------------
# lattice-built symbols and test functions
# ---------------------------------------------------------------------------


def build_lattice_symbol(V: LatticeSeq, grid: Grid) -> LatticeSymbol:
    """Lattice symbol with per-axis bumps flat on [-1/4,1/4], support [-1/2,1/2]."""
    sym = LatticeSymbol(V)
    if V.radius + sym.outer > grid.max_freq:
        raise RangeError("lattice truncation exceeds the grid frequency range")
    return sym


_TEST_BUMP_INNER = 0.125
_TEST_BUMP_OUTER = 0.25


def test_bump_profile(t):
    """Per-axis frequency bump for lattice test functions: supp [-1/4,1/4]."""
    return bumps.axis_flat_bump(t, _TEST_BUMP_INNER, _TEST_BUMP_OUTER)


def modulated_envelope(grid: Grid, normalize: bool = True) -> np.ndarray:
    """Physical envelope: inverse transform of the per-axis test bump.

    With ``normalize`` the envelope is scaled so its modulus is >= 1 on
    [-pi, pi]^n, the nonvanishing window the norm equivalences lean on.
    """
    ax = grid.axis_points()
    prof = bumps.inverse_transform_profile(test_bump_profile, _TEST_BUMP_OUTER, ax)
    if normalize:
        window = np.abs(ax) <= np.pi + 1e-12
        prof = prof / np.abs(prof[window]).min()
    out = prof
    for _ in range(grid.dim - 1):
        out = np.multiply.outer(out, prof)
    return out.astype(np.complex128)


def modulated_bump_sum(coeffs: np.ndarray, radius: int, grid: Grid, envelope=None) -> Field:
    """sum_nu c(nu) exp(i nu.x) times the physical envelope.

    ``coeffs`` is indexed over the truncated lattice [-radius, radius]^n;
    the grid period must be an integer multiple of 2*pi so the integer
    modulations are periodic.
    """
    n = grid.dim
    p = grid.period / (2.0 * np.pi)
    if abs(p - round(p)) > 1e-9:
        raise ParameterError("integer lattice modulations need period = 2*pi*P")
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.shape != (2 * radius + 1,) * n:
        raise ShapeError("coefficient array does not match the lattice radius")
    xpts = np.stack([m.ravel() for m in grid.mesh()], axis=-1)
    kax = np.arange(-radius, radius + 1)
    mesh = np.meshgrid(*([kax] * n), indexing="ij")
    kpts = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
    wave = np.exp(1j * (xpts @ kpts.T)) @ coeffs.ravel()
    env = modulated_envelope(grid) if envelope is None else envelope
    return Field(grid, "physical", wave.reshape(grid.shape) * env)


def build_lattice_test_function(A: LatticeSeq, grid: Grid) -> Field:
    """Modulated-bump superposition with nonnegative lattice coefficients."""
    if A.blocks != 1:
        raise ShapeError("test-function coefficients are single-block")
    return modulated_bump_sum(A.values, A.radius, grid)


@dataclass
class EquivalenceReport:
    """Ratio bands of the lattice-construction norm equivalences."""

    input_ratios: list
    output_ratios: list

    def band(self, which: str):
        vals = self.input_ratios if which == "input" else self.output_ratios
        return min(vals), max(vals)


def lattice_equivalence_experiment(
    V: LatticeSeq,
    grid: Grid,
    q,
    r: float,
    trials: int = 20,
    seed: int = 0,
    cost_cap: float = DEFAULT_COST_CAP,
) -> EquivalenceReport:
    """Random-coefficient check of the two lattice-construction equivalences:
    input amalgam norms against coefficient l^2 norms, and the operator
    output amalgam norm against the convolution coefficient l^2 norm.

    Amalgam norms here use cells of side 2*pi (the modulation period), which
    changes the equivalence constants but not the equivalences.
    """
    nslots = V.blocks
    sym = build_lattice_symbol(V, grid)
    cube = 2.0 * np.pi
    in_ratios, out_ratios = [], []
    for t in range(trials):
        rng = rng_for(seed, 77, t)
        # uniform nonnegative coefficients on the slot lattice
        As = [
            LatticeSeq(V.dim, V.radius, 1, rng.uniform(0.0, 1.0, size=(2 * V.radius + 1,) * V.dim))
            for _ in range(nslots)
        ]
        fields = [build_lattice_test_function(a, grid) for a in As]
        for j, (a, f) in enumerate(zip(As, fields)):
            qj = q[j] if np.ndim(q) else q
            in_ratios.append(
                amalgam_norm(f, AmalgamParams(2.0, qj), cube) / np.linalg.norm(a.values)
            )
        out = evaluate(sym, fields, cost_cap)
        d = lattice_output_coefficients(V, As)
        dnorm = np.linalg.norm(d.values)
        if dnorm > 0:
            out_ratios.append(amalgam_norm(out, AmalgamParams(2.0, r), cube) / dnorm)
    return EquivalenceReport(in_ratios, out_ratios)


# ---------------------------------------------------------------------------
# empirical boundedness
# ---------------------------------------------------------------------------


@dataclass
class FunctionFamily:
    """Seeded generator of random band-limited test tuples."""

    grid: Grid
    bandwidth: float
    seed: int = 0

    def make(self, trial: int, slot: int) -> Field:
        return random_band_limited(self.grid, self.bandwidth, rng_for(self.seed, trial, slot))


@dataclass
class BoundednessReport:
    q: tuple
    r: float
    ratios: list = dc_field(default_factory=list)
    empirical_sup: float = 0.0
    bound_value: float | None = None
    metadata: dict = dc_field(default_factory=dict)


def scaling_bound_exponents(q, n: int):
    """Exponents of the band-limited scaling law: (n/2, [n/min(2, q_j)])."""
    return 0.5 * n, [n / min(2.0, qj) for qj in q]


def general_bound_exponents(q, p, n: int):
    """Exponent family of the relaxed-smoothness bound: (n/2, [n/p_j]).

    Requires p_j, q_j >= 2 and 1/p_j + 1/q_j - 1/2 >= 0; with p_j = 2 it
    reduces exactly to the scaling-law exponents.
    """
    for pj, qj in zip(p, q):
        if pj < 2 or qj < 2:
            raise ParameterError("exponents must be >= 2")
        if 1.0 / pj + 1.0 / qj - 0.5 < -1e-12:
            raise ParameterError("need 1/p + 1/q >= 1/2 per slot")
    return 0.5 * n, [n / pj for pj in p]


def theoretical_bound(sym: BandLimitedSymbol, q, weight, grid_x: Grid, grid_xi: Grid) -> float:
    """Scaling-law right-hand side for a band-limited symbol:
    R_0^(n/2) prod_j R_j^(n/min(2,q_j)) times the weighted symbol norm."""
    n = grid_x.dim
    e0, es = scaling_bound_exponents(q, n)
    r0 = max(sym.r0, 1.0)
    vals = sym.product_values(grid_x, grid_xi, len(sym.radii))
    if weight is not None:
        mesh = np.meshgrid(*([grid_xi.freq_axis()] * (n * len(sym.radii))), indexing="ij")
        pts = np.stack(mesh, axis=-1).reshape(mesh[0].shape + (len(sym.radii), n))
        vals = vals / weight(pts).reshape((1,) * n + mesh[0].shape)
    norm = symbol_l2ul_norm(vals, grid_x, grid_xi)
    out = r0**e0 * norm
    for rj, ej in zip(sym.radii, es):
        out *= max(rj, 1.0) ** ej
    return float(out)


def empirical_bound(
    sym: SymbolSpec,
    q,
    r: float,
    family: FunctionFamily,
    trials: int,
    weight=None,
    theory_grids=None,
    cost_cap: float = DEFAULT_COST_CAP,
) -> BoundednessReport:
    """Sampled operator-norm ratios against the product of input norms.

    The empirical sup is the max of sampled ratios (a lower bound on the
    true norm, reported as such, never extrapolated).  For band-limited
    symbols the scaling-law bound value is attached when aligned product
    grids are supplied.
    """
    q = tuple(float(v) for v in q)
    nslots = len(q)
    report = BoundednessReport(q=q, r=float(r))
    for trial in range(trials):
        fields = [family.make(trial, j) for j in range(nslots)]
        den = 1.0
        for f, qj in zip(fields, q):
            den *= amalgam_norm(f, AmalgamParams(2.0, qj))
        if den == 0.0:
            continue
        out = evaluate(sym, fields, cost_cap)
        num = amalgam_norm(out, AmalgamParams(2.0, r))
        report.ratios.append(num / den)
    report.empirical_sup = max(report.ratios) if report.ratios else 0.0
    if isinstance(sym, BandLimitedSymbol) and theory_grids is not None:
        gx, gxi = theory_grids
        report.bound_value = theoretical_bound(sym, q, weight, gx, gxi)
    return report


# ---------------------------------------------------------------------------
# exponent arithmetic
# ---------------------------------------------------------------------------


def check_exponent_system(q, r: float, s, n: int = 1):
    """Validate the full exponent system of the relaxed-smoothness theorem.

    Returns (True, None) or (False, witness) naming the first violated
    constraint in a fixed documented order.
    """
    q = [float(v) for v in q]
    s = [float(v) for v in s]
    N = len(q)
    if len(s) != N + 1:
        return False, "len(s) != len(q) + 1"
    for j, qj in enumerate(q, start=1):
        if not 2.0 <= qj:
            return False, f"q_{j} < 2"
    if not (2.0 / N <= r):
        return False, f"r < 2/{N}"
    if sum(1.0 / v for v in q) < 1.0 / r - 1e-12:
        return False, "sum 1/q_j < 1/r"
    if abs(s[0] - n / 2.0) > 1e-12:
        return False, "s_0 != n/2"
    for j in range(1, N + 1):
        lo = n / 2.0 - n / q[j - 1]
        if s[j] < lo - 1e-12:
            return False, f"s_{j} < n/2 - n/q_{j}"
        if s[j] > n / 2.0 + 1e-12:
            return False, f"s_{j} > n/2"
    target = sum(n / 2.0 - n / qj for qj in q) + n / r
    if abs(sum(s[1:]) - target) > 1e-12:
        return False, "sum s_j != sum (n/2 - n/q_j) + n/r"
    return True, None
