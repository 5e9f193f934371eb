"""Periodic sampling grids and discrete Fourier transforms.

Conventions (fixed for the whole toolkit):

* physical samples  x_j = -L/2 + j*L/M,  j = 0..M-1 per axis;
* frequency lattice xi_k = (2*pi/L)*k,   k = -M/2..M/2-1 per axis;
* forward transform  F f(xi_k) = h^n * sum_j exp(-i x_j.xi_k) f(x_j),
  the Riemann-sum approximation of  int exp(-i x.xi) f(x) dx;
* inverse transform  f(x_j) = (2*pi)^{-n} (2*pi/L)^n * sum_k exp(i x_j.xi_k) F(xi_k).

Both are implemented with FFTs plus the phase factors forced by the centered
grid, so the pair inverts to machine precision and the forward transform is
exact on trigonometric polynomials below the Nyquist band.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import reduce
from typing import Literal

import numpy as np

from .errors import ParameterError, ShapeError

Side = Literal["physical", "frequency"]


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic grid: ``dim`` axes, torus side ``period``, ``res`` samples per axis."""

    dim: int
    period: float
    res: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError(f"dim must be 1 or 2, got {self.dim}")
        if not self.period > 0:
            raise ParameterError("period must be positive")
        if not _is_power_of_two(self.res) or self.res < 4:
            raise ParameterError("res must be a power of two >= 4")

    @property
    def spacing(self) -> float:
        """Physical sample spacing h = L/M."""
        return self.period / self.res

    @property
    def freq_spacing(self) -> float:
        """Frequency lattice spacing 2*pi/L."""
        return 2.0 * np.pi / self.period

    @property
    def shape(self) -> tuple:
        return (self.res,) * self.dim

    @property
    def npoints(self) -> int:
        return self.res**self.dim

    def axis_points(self) -> np.ndarray:
        """1-d physical sample coordinates along one axis."""
        return -self.period / 2.0 + self.spacing * np.arange(self.res)

    def freq_axis(self) -> np.ndarray:
        """1-d frequency lattice coordinates along one axis."""
        return self.freq_spacing * (np.arange(self.res) - self.res // 2)

    def mesh(self) -> list:
        """Physical coordinate meshes, one array of shape ``self.shape`` per axis."""
        return list(np.meshgrid(*([self.axis_points()] * self.dim), indexing="ij"))

    def freq_mesh(self) -> list:
        return list(np.meshgrid(*([self.freq_axis()] * self.dim), indexing="ij"))

    @property
    def max_freq(self) -> float:
        """Largest per-axis lattice frequency, pi*M/L."""
        return np.pi * self.res / self.period

    @property
    def bandwidth_limit(self) -> float:
        """Half the Nyquist band; test-function constructors should stay inside."""
        return 0.5 * self.max_freq


@dataclass
class Field:
    """Complex samples of one function on a grid, physical or frequency side."""

    grid: Grid
    side: Side
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        if self.side not in ("physical", "frequency"):
            raise ParameterError(f"bad side {self.side!r}")
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise ShapeError(
                f"values shape {vals.shape} != grid shape {self.grid.shape}"
            )
        self.values = vals

    def copy(self) -> "Field":
        return Field(self.grid, self.side, self.values.copy())


def field_from(grid: Grid, values, side: Side = "physical") -> Field:
    arr = np.broadcast_to(np.asarray(values, dtype=np.complex128), grid.shape).copy()
    return Field(grid, side, arr)


def _axis_signs(m: int) -> np.ndarray:
    # (-1)^k on the centered index k = -M/2 .. M/2-1
    k = np.arange(m) - m // 2
    return np.where(k % 2 == 0, 1.0, -1.0)


def _sign_mesh(grid: Grid) -> np.ndarray:
    s = _axis_signs(grid.res)
    return reduce(np.multiply.outer, [s] * grid.dim) if grid.dim > 1 else s


def forward_transform(f: Field) -> Field:
    """Riemann-sum Fourier transform onto the centered frequency lattice."""
    if f.side != "physical":
        raise ParameterError("forward_transform expects a physical-side field")
    g = f.grid
    vals = np.fft.fftshift(np.fft.fftn(f.values))
    vals *= _sign_mesh(g)
    vals *= g.spacing**g.dim
    return Field(g, "frequency", vals)


def inverse_transform(F: Field) -> Field:
    """Inverse of :func:`forward_transform`; exact round trip."""
    if F.side != "frequency":
        raise ParameterError("inverse_transform expects a frequency-side field")
    g = F.grid
    vals = np.fft.ifftn(np.fft.ifftshift(_sign_mesh(g) * F.values))
    vals *= (g.res / g.period) ** g.dim
    return Field(g, "physical", vals)


def lebesgue_norm(f: Field, p: float) -> float:
    """Riemann-sum L^p quasi-norm on the torus; p = inf gives the sample sup."""
    if not p > 0:
        raise ParameterError("p must be positive")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    g = f.grid
    cell = (g.spacing if f.side == "physical" else g.freq_spacing) ** g.dim
    return float((cell * np.sum(a**p)) ** (1.0 / p))


def multiplier_apply(f: Field, m) -> Field:
    """Fourier multiplier m(D) f: multiply in frequency, transform back.

    ``m`` is a callable on the frequency mesh list, or an ndarray of samples
    already laid out on the centered lattice.
    """
    F = forward_transform(f)
    if callable(m):
        mask = m(F.grid.freq_mesh())
    else:
        mask = np.asarray(m)
        if mask.shape != F.grid.shape:
            raise ShapeError("multiplier sample shape mismatch")
    F.values *= mask
    return inverse_transform(F)


def translate(f: Field, shift: tuple) -> Field:
    """Shift by whole grid steps (periodic roll); shift[d] counts samples."""
    return Field(f.grid, f.side, np.roll(f.values, shift, axis=tuple(range(f.grid.dim))))


def block_multiplier_apply(values: np.ndarray, axes: tuple, mask: np.ndarray) -> np.ndarray:
    """Apply one multiplier along an axis group of a dense sample array.

    The mask is laid out on the centered dual lattice of those axes.  Scale
    factors of the transform pair cancel, so only the fftshift bookkeeping
    is needed.
    """
    w = np.fft.fftshift(np.fft.fftn(values, axes=axes), axes=axes)
    shape = [1] * values.ndim
    for i, ax in enumerate(axes):
        shape[ax] = mask.shape[i] if mask.ndim == len(axes) else values.shape[ax]
    w *= mask.reshape(shape)
    return np.fft.ifftn(np.fft.ifftshift(w, axes=axes), axes=axes)


def dual_axis(count: int, spacing: float) -> np.ndarray:
    """Centered dual lattice of a centered uniform axis (count, spacing)."""
    return (2.0 * np.pi / (count * spacing)) * (np.arange(count) - count // 2)


def random_band_limited(grid: Grid, bandwidth: float, rng, real: bool = False) -> Field:
    """Random trigonometric polynomial with Gaussian coefficients.

    Frequency support: lattice points with |xi|_2 <= bandwidth.  Keeping
    ``bandwidth`` at or below ``grid.bandwidth_limit`` leaves headroom for
    products of fields to stay alias-free.
    """
    mesh = grid.freq_mesh()
    rad2 = sum(m**2 for m in mesh)
    mask = rad2 <= bandwidth**2
    coeff = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeff = np.where(mask, coeff, 0.0)
    f = inverse_transform(Field(grid, "frequency", coeff))
    if real:
        f = Field(grid, "physical", f.values.real.astype(np.complex128))
    return f
