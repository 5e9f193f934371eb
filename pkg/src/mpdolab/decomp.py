"""Frequency decompositions: dyadic shells, the unit box pair, symbol blocks.

Two partitions of unity are provided.

* The dyadic (Littlewood-Paley style) partition: a flat-top radial base
  profile equal to 1 on |y| <= 1 with support |y| <= 2, telescoped into
  shells supported on 2^(k-1) <= |y| <= 2^(k+1).  The last representable
  shell index is chosen so the finite sum is identically 1 at every sampled
  frequency.
* The unit box pair (kappa, chi): kappa supported in [-1,1]^n, chi
  band-limited with transform supported in a small ball and bounded below on
  [-1,1]^n, with sum_nu kappa(xi-nu) chi(xi-nu) = 1 over integer translates.

Box operators multiply a field's transform by a translated kappa; symbol
blocks apply one dyadic multiplier per variable group of a dense sample
array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import bumps
from .errors import ConstructionError, ParameterError, RangeError, ResolutionError
from .grid import (
    Field,
    Grid,
    block_multiplier_apply,
    dual_axis,
    field_from,
    forward_transform,
)


@dataclass(frozen=True)
class DyadicPartition:
    """Dyadic partition of unity on the frequency side of one grid."""

    grid: Grid
    k_max: int
    base: Field = dc_field(repr=False)

    def shell(self, k: int, r) -> np.ndarray:
        """Shell profile psi_k evaluated at radii ``r``."""
        if k < 0 or k > self.k_max:
            raise RangeError(f"shell {k} outside 0..{self.k_max}")
        return bumps.dyadic_shell(k, r)

    def shell_field(self, k: int) -> Field:
        mesh = self.grid.freq_mesh()
        return Field(self.grid, "frequency", self.shell(k, bumps.radius(mesh)))


def shells_to_cover(max_radius: float) -> int:
    """Smallest k with 2^k >= max_radius, so shells 0..k sum to 1 up there."""
    return max(0, math.ceil(math.log2(max_radius)))


def build_lp_partition(grid: Grid) -> DyadicPartition:
    """Dyadic partition covering every representable frequency of ``grid``.

    The base profile is evaluated analytically at the samples, so the
    support and flat-top properties are exact; the shells from index 1 up
    vanish outside 2^(k-1) <= |y| <= 2^(k+1) identically.
    """
    corner = math.sqrt(grid.dim) * grid.max_freq
    k_max = shells_to_cover(corner)
    if k_max < 3:
        raise ResolutionError(
            f"grid supports only {k_max} dyadic shells; need at least 3"
        )
    base = Field(grid, "frequency", bumps.dyadic_base(bumps.radius(grid.freq_mesh())))
    return DyadicPartition(grid, k_max, base)


# ---------------------------------------------------------------------------
# unit box pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformPair:
    """Box pair (kappa, chi) on a grid with integer-representable translates."""

    grid: Grid
    kappa: Field = dc_field(repr=False)
    chi: Field = dc_field(repr=False)
    c_lower: float
    width: float
    stride: int  # samples per unit frequency translate

    def translates(self):
        """Integer translate range representable on the torus, per axis."""
        half = self.grid.res // (2 * self.stride)
        return range(-half, half)


def _unit_stride(grid: Grid) -> int:
    p = grid.period / (2.0 * np.pi)
    stride = int(round(p))
    if stride < 1 or abs(p - stride) > 1e-9:
        raise ParameterError(
            "box pair needs period = 2*pi*P with integer P so unit translates land on the lattice"
        )
    return stride


def build_uniform_pair(grid: Grid, c_target: float = 0.05) -> UniformPair:
    """Construct the box pair on ``grid``.

    chi is realized through its samples as the (grid) transform of a radial
    bump, normalized to 1 at the origin, so its discrete spectrum is
    compactly supported by construction; kappa is the smooth unit partition
    divided by chi.  The bump width is shrunk until chi stays above
    ``c_target`` on [-1,1]^n.
    """
    if grid.period < 8.0 - 1e-9:
        raise ParameterError("box pair needs period >= 8")
    stride = _unit_stride(grid)
    n = grid.dim
    fmesh = grid.freq_mesh()
    fax = grid.freq_axis()
    box_mask = np.ones(grid.shape, dtype=bool)
    for d in range(n):
        coord = fmesh[d]
        box_mask &= np.abs(coord) <= 1.0 + 1e-12

    part = bumps.tensor_eval(bumps.unit_partition_1d, fmesh)

    for width in (0.45, 0.4, 0.35, 0.3, 0.25):
        g = bumps.bump(bumps.radius(grid.mesh()), width)
        chi_raw = forward_transform(field_from(grid, g)).values
        center = (grid.res // 2,) * n
        chi_vals = (chi_raw / chi_raw[center]).real
        c_lower = float(np.abs(chi_vals)[box_mask].min())
        if c_lower >= c_target:
            kappa_vals = np.where(part != 0.0, part / np.where(chi_vals == 0, 1.0, chi_vals), 0.0)
            return UniformPair(
                grid,
                Field(grid, "frequency", kappa_vals),
                Field(grid, "frequency", chi_vals),
                c_lower,
                width,
                stride,
            )
    raise ConstructionError(f"could not reach |chi| >= {c_target} on the unit box")


def pair_partition_residual(pair: UniformPair) -> float:
    """max_xi | sum_nu kappa(xi-nu) chi(xi-nu) - 1 | over the sampled torus."""
    prod = (pair.kappa.values * pair.chi.values).real
    total = np.zeros_like(prod)
    n = pair.grid.dim
    for shift in np.ndindex(*((pair.grid.res // pair.stride,) * n)):
        total += np.roll(prod, [s * pair.stride for s in shift], axis=tuple(range(n)))
    return float(np.abs(total - 1.0).max())


def box_apply(pair: UniformPair, nu, f: Field) -> Field:
    """Box operator: multiply the transform of f by kappa(xi - nu)."""
    nu = np.atleast_1d(np.asarray(nu, dtype=int))
    n = pair.grid.dim
    if nu.shape != (n,):
        raise RangeError("translate must have one integer per axis")
    half = pair.grid.res // (2 * pair.stride)
    if np.any(np.abs(nu) > half - 1):
        raise RangeError(f"translate {nu} outside representable range +-{half - 1}")
    F = forward_transform(f)
    mask = np.roll(pair.kappa.values, [v * pair.stride for v in nu], axis=tuple(range(n)))
    F.values *= mask
    from .grid import inverse_transform

    return inverse_transform(F)


# ---------------------------------------------------------------------------
# symbol blocks
# ---------------------------------------------------------------------------


def _symbol_blocks(values: np.ndarray, grid_x: Grid, grid_xi: Grid):
    n = grid_x.dim
    nslots, rem = divmod(values.ndim - n, n)
    if rem or nslots < 1 or grid_xi.dim != n:
        raise ParameterError("symbol array rank does not match the grids")
    blocks = [tuple(range(n))]
    for j in range(nslots):
        blocks.append(tuple(range(n * (j + 1), n * (j + 2))))
    spacings = [grid_x.spacing] + [grid_xi.freq_spacing] * nslots
    counts = [grid_x.res] + [grid_xi.res] * nslots
    return blocks, spacings, counts


def block_shell_counts(grid_x: Grid, grid_xi: Grid, nslots: int):
    """Last shell index per variable group covering that group's dual range."""
    n = grid_x.dim
    out = []
    for count, spacing in [(grid_x.res, grid_x.spacing)] + [
        (grid_xi.res, grid_xi.freq_spacing)
    ] * nslots:
        dual_max = math.sqrt(n) * np.pi / spacing
        out.append(shells_to_cover(dual_max))
    return out


def delta_block(values: np.ndarray, k, grid_x: Grid, grid_xi: Grid) -> np.ndarray:
    """Dyadic block of a sampled symbol: one shell multiplier per variable group."""
    blocks, spacings, counts = _symbol_blocks(values, grid_x, grid_xi)
    kmaxes = block_shell_counts(grid_x, grid_xi, len(blocks) - 1)
    k = tuple(int(v) for v in np.atleast_1d(k))
    if len(k) != len(blocks):
        raise RangeError("need one shell index per variable group")
    out = np.asarray(values, dtype=np.complex128)
    for kb, axes, spacing, count, kmax in zip(k, blocks, spacings, counts, kmaxes):
        if kb < 0 or kb > kmax:
            raise RangeError(f"shell {kb} outside 0..{kmax} for this variable group")
        dual = dual_axis(count, spacing)
        mesh = np.meshgrid(*([dual] * len(axes)), indexing="ij")
        mask = bumps.dyadic_shell(kb, bumps.radius(mesh))
        out = block_multiplier_apply(out, axes, mask)
    return out
