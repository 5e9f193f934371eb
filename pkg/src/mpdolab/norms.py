"""Function-space and sequence-space quasi-norms.

Covers the Riemann-sum amalgam norms (local L^p on unit cubes, global l^q
over cube translates), the uniformly local L^2 norm of sampled symbols on
product grids, weak-type sequence norms, the inverse-polynomial smoothing
kernel and the square-function norm built from it, a discrete bmo
quasi-norm, and the dyadic-block Besov-type symbol norm.

Cube partitions are anchored at the integer lattice (cubes are nu + Q with
Q = [-1/2,1/2)^n and nu integer), which is what every equivalence computed
here assumes.  Grids must align: an axis with sample spacing d admits cubes
of side c only when c/d is a whole number of samples and the sample count
splits into whole cubes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ParameterError
from .grid import Field, Grid, field_from, forward_transform, inverse_transform, lebesgue_norm


@dataclass(frozen=True)
class AmalgamParams:
    """Exponent pair (p, q): local L^p per cube, global l^q over cubes."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ParameterError("amalgam exponents must be positive")


@dataclass(frozen=True)
class KernelParams:
    """Decay exponent of the smoothing kernel <x>^(-decay); needs decay > dim."""

    decay: float

    def __post_init__(self):
        if not self.decay > 0:
            raise ParameterError("kernel decay must be positive")


def _axis_cubes(count: int, spacing: float, cube: float):
    """Samples-per-cube and left-roll aligning axis samples to cube cells."""
    s_float = cube / spacing
    s = int(round(s_float))
    if s < 1 or abs(s_float - s) > 1e-9 * max(1.0, s):
        raise AlignmentError(
            f"cube side {cube} is not a whole number of samples (spacing {spacing})"
        )
    if count % s:
        raise AlignmentError(f"axis of {count} samples does not split into cubes of {s}")
    # cube index of sample j at coordinate (j - count//2)*spacing, cells centered
    # on integer multiples of the cube side
    j = np.arange(count)
    c = (2 * (j - count // 2) + s) // (2 * s)
    changes = np.nonzero(c[1:] != c[:-1])[0]
    r0 = int(changes[0]) + 1 if changes.size else s
    return s, r0 % s


def cube_groups(values: np.ndarray, spacings, cube: float = 1.0) -> np.ndarray:
    """Reshape samples into (cubes, samples-per-cube), cube cells contiguous."""
    arr = np.asarray(values)
    ss = []
    for ax in range(arr.ndim):
        s, r = _axis_cubes(arr.shape[ax], spacings[ax], cube)
        ss.append(s)
        if r:
            arr = np.roll(arr, -r, axis=ax)
    shape = []
    for ax in range(arr.ndim):
        shape += [arr.shape[ax] // ss[ax], ss[ax]]
    arr = arr.reshape(shape)
    nd = len(ss)
    arr = np.transpose(arr, [2 * i for i in range(nd)] + [2 * i + 1 for i in range(nd)])
    ncubes = int(np.prod([values.shape[ax] // ss[ax] for ax in range(nd)]))
    return arr.reshape(ncubes, -1)


def _inner_outer(groups: np.ndarray, p: float, q: float, cell: float) -> float:
    a = np.abs(groups)
    if np.isinf(p):
        inner = a.max(axis=1)
    else:
        inner = (cell * np.sum(a**p, axis=1)) ** (1.0 / p)
    if np.isinf(q):
        return float(inner.max())
    return float(np.sum(inner**q) ** (1.0 / q))


def _field_spacing(f: Field) -> float:
    return f.grid.spacing if f.side == "physical" else f.grid.freq_spacing


def amalgam_norm(f: Field, prm: AmalgamParams, cube: float = 1.0) -> float:
    """Amalgam quasi-norm || f ||_(L^p, l^q) with cells of side ``cube``."""
    d = _field_spacing(f)
    groups = cube_groups(f.values, [d] * f.grid.dim, cube)
    return _inner_outer(groups, prm.p, prm.q, d**f.grid.dim)


def l2_ul_norm(f: Field) -> float:
    """Uniformly local L^2 norm: sup over unit cubes of the local L^2 mass."""
    return amalgam_norm(f, AmalgamParams(2.0, np.inf))


def symbol_l2ul_norm(values: np.ndarray, grid_x: Grid, grid_xi: Grid) -> float:
    """Uniformly local L^2 norm of a sampled symbol on the product grid.

    ``values`` has the x axes first (physical lattice of ``grid_x``) followed
    by one group of frequency axes per operator slot (lattice of ``grid_xi``).
    All (1+N)*n axes must align with unit cubes.
    """
    n = grid_x.dim
    if grid_xi.dim != n:
        raise AlignmentError("x and frequency grids must share the dimension")
    nslots, rem = divmod(values.ndim - n, n)
    if rem or nslots < 1:
        raise AlignmentError("symbol array rank does not match the grids")
    spacings = [grid_x.spacing] * n + [grid_xi.freq_spacing] * (n * nslots)
    groups = cube_groups(values, spacings, 1.0)
    cell = float(np.prod(spacings))
    return _inner_outer(groups, 2.0, np.inf, cell)


def lorentz_weak_norm(a, q: float) -> float:
    """Weak sequence norm sup_t t * #{ |a_k| > t }^(1/q), exact on finite data."""
    if not q > 0:
        raise ParameterError("q must be positive")
    vals = np.abs(np.asarray(getattr(a, "values", a), dtype=float)).ravel()
    vals = vals[vals > 0]
    if vals.size == 0:
        return 0.0
    vals.sort()
    vals = vals[::-1]
    ranks = np.arange(1, vals.size + 1, dtype=float)
    return float(np.max(vals * ranks ** (1.0 / q)))


def sequence_mixed_norm(a: np.ndarray, exponents) -> float:
    """Mixed l-norm, exponents listed inner-to-outer along the leading axes."""
    out = np.abs(np.asarray(a, dtype=float))
    for p in exponents:
        if np.isinf(p):
            out = out.max(axis=0)
        else:
            out = np.sum(out**p, axis=0) ** (1.0 / p)
    return float(out)


# ---------------------------------------------------------------------------
# smoothing kernel <x>^(-decay)
# ---------------------------------------------------------------------------


def _periodized_kernel(grid: Grid, decay: float) -> np.ndarray:
    # 3^n nearest period translates; for decay > dim and period >= 8 the
    # neglected tail is below 1e-6 of the peak
    mesh = grid.mesh()
    out = np.zeros(grid.shape)
    for shifts in itertools.product((-1.0, 0.0, 1.0), repeat=grid.dim):
        r2 = sum((m + s * grid.period) ** 2 for m, s in zip(mesh, shifts))
        out += (1.0 + r2) ** (-decay / 2.0)
    return out


def smoothing_kernel_apply(f: Field, prm: KernelParams) -> Field:
    """Periodic convolution with the periodized kernel <.>^(-decay).

    The input is forced nonnegative by taking |f|; the output is strictly
    positive whenever f is not identically zero.
    """
    g = f.grid
    if not prm.decay > g.dim:
        raise ParameterError(f"kernel decay {prm.decay} must exceed dim {g.dim}")
    fa = field_from(g, np.abs(f.values))
    ker = field_from(g, _periodized_kernel(g, prm.decay))
    prod = forward_transform(fa).values * forward_transform(ker).values
    conv = inverse_transform(Field(g, "frequency", prod)).values.real
    return Field(g, "physical", conv)


def smoothed_square_norm(f: Field, p: float, prm: KernelParams) -> float:
    """|| sqrt(S(|f|^2)) ||_{L^p} with S the smoothing-kernel convolution.

    Hypothesis min(1, p/2) * decay > dim is enforced; under it this norm is
    equivalent to the (L^2, l^p) amalgam norm.
    """
    n = f.grid.dim
    if not min(1.0, p / 2.0) * prm.decay > n:
        raise ParameterError("need min(1, p/2) * decay > dim")
    sq = Field(f.grid, "physical", np.abs(f.values) ** 2)
    smoothed = smoothing_kernel_apply(sq, prm)
    root = Field(f.grid, "physical", np.sqrt(np.maximum(smoothed.values.real, 0.0)))
    return lebesgue_norm(root, p)


def equivalent_amalgam_check(fields, g_envelope: Field, prm: AmalgamParams):
    """Ratio band of the enveloped norm || g(x-nu) f(x) ||_{L^p_x l^q_nu}
    against the cube-partition amalgam norm, over a family of fields.

    The envelope must be bounded below on the central unit cube; zero fields
    are skipped.  Returns (min_ratio, max_ratio).
    """
    if isinstance(fields, Field):
        fields = [fields]
    grid = g_envelope.grid
    n = grid.dim
    s, _ = _axis_cubes(grid.res, grid.spacing, 1.0)
    ax = grid.axis_points()
    central = (ax >= -0.5 - 1e-12) & (ax < 0.5 - 1e-12)
    mask = central
    for _ in range(n - 1):
        mask = np.multiply.outer(mask, central)
    c0 = np.abs(g_envelope.values)[mask].min()
    if not c0 > 0:
        raise ParameterError("envelope must be bounded below on the unit cube")

    translates = int(round(grid.period))
    if abs(grid.period - translates) > 1e-9:
        raise AlignmentError("integer period required for unit translates")
    cell = grid.spacing**n
    lo, hi = np.inf, 0.0
    for f in fields:
        base = amalgam_norm(f, prm)
        if base == 0.0:
            if np.abs(f.values).max() == 0.0:
                continue
        inner = []
        for nu in itertools.product(range(translates), repeat=n):
            genv = np.roll(g_envelope.values, [v * s for v in nu], axis=tuple(range(n)))
            prod = np.abs(genv * f.values)
            if np.isinf(prm.p):
                inner.append(prod.max())
            else:
                inner.append((cell * np.sum(prod**prm.p)) ** (1.0 / prm.p))
        inner = np.asarray(inner)
        val = inner.max() if np.isinf(prm.q) else float(np.sum(inner**prm.q) ** (1.0 / prm.q))
        ratio = val / base
        lo, hi = min(lo, ratio), max(hi, ratio)
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# discrete bmo
# ---------------------------------------------------------------------------


def bmo_discrete_norm(f: Field) -> float:
    """Dyadic bmo quasi-norm: sup of mean oscillation over grid-representable
    dyadic cubes of side <= 1 plus sup of mean modulus over sides >= 1."""
    grid = f.grid
    n = grid.dim
    s, r = _axis_cubes(grid.res, grid.spacing, 1.0)
    arr = f.values
    for ax in range(n):
        if r:
            arr = np.roll(arr, -r, axis=ax)

    def grouped(w):
        shape = []
        for ax in range(n):
            shape += [grid.res // w, w]
        g2 = arr.reshape(shape)
        g2 = np.transpose(g2, [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)])
        return g2.reshape(-1, w**n)

    osc_sup = 0.0
    w = s
    while w >= 1:
        g2 = grouped(w)
        means = g2.mean(axis=1, keepdims=True)
        osc_sup = max(osc_sup, float(np.abs(g2 - means).mean(axis=1).max()))
        if w % 2:
            break
        w //= 2

    period = int(round(grid.period))
    mean_sup = 0.0
    u = 1
    while u <= period and period % u == 0:
        g2 = grouped(s * u)
        mean_sup = max(mean_sup, float(np.abs(g2).mean(axis=1).max()))
        u *= 2
    return osc_sup + mean_sup


# ---------------------------------------------------------------------------
# dyadic-block Besov-type symbol norm
# ---------------------------------------------------------------------------


def symbol_besov_norm(
    values: np.ndarray,
    weight,
    s,
    t: float,
    grid_x: Grid,
    grid_xi: Grid,
) -> float:
    """Besov-type quasi-norm of a sampled symbol.

    Decomposes the symbol into dyadic blocks in each variable group, divides
    each block by the weight (a callable on stacked frequency points, or
    None for the constant weight 1), takes the uniformly local L^2 norm, and
    aggregates 2^(s.k) * norm over all shell tuples in l^t.
    """
    from .decomp import block_shell_counts, delta_block

    n = grid_x.dim
    nslots = values.ndim // n - 1
    svec = np.asarray(s, dtype=float)
    if svec.shape != (nslots + 1,):
        raise ParameterError("smoothness vector length must be one per variable group")
    if np.any(svec < 0) or not t > 0:
        raise ParameterError("need nonnegative smoothness and positive t")
    kmaxes = block_shell_counts(grid_x, grid_xi, nslots)

    if weight is None:
        winv = 1.0
    else:
        mesh = np.meshgrid(*([grid_xi.freq_axis()] * (n * nslots)), indexing="ij")
        pts = np.stack(mesh, axis=-1).reshape(mesh[0].shape + (nslots, n))
        wvals = weight(pts)
        winv = (1.0 / wvals).reshape((1,) * n + mesh[0].shape)

    terms = []
    for k in itertools.product(*[range(km + 1) for km in kmaxes]):
        block = delta_block(values, k, grid_x, grid_xi)
        norm_k = symbol_l2ul_norm(block * winv, grid_x, grid_xi)
        terms.append(2.0 ** float(np.dot(svec, k)) * norm_k)
    terms = np.asarray(terms)
    if np.isinf(t):
        return float(terms.max())
    return float(np.sum(terms**t) ** (1.0 / t))
