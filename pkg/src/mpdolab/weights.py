"""Lattice weights, weight functions, and the multilinear form diagnostics.

The central object is the (N+2)-linear nonnegative form

    B(V; A_0, .., A_N) = sum_nu V(nu_1, .., nu_N) A_0(nu_1+..+nu_N) prod_j A_j(nu_j)

over truncated integer lattices.  The best constant of the form against the
product of l^2 norms is estimated by alternating maximization: the form is
linear in each slot with nonnegative coefficients, so the slot-wise
maximizer over the l^2 sphere is the normalized coefficient vector itself,
and sweeps produce a monotone nondecreasing value.  Growth of the estimate
along a geometric ladder of truncation radii is the divergence diagnostic;
no single threshold is ever used.

Weight functions on stacked frequency points come as plain callables taking
arrays of shape (..., nslots, dim).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import ParameterError, RangeError, ShapeError
from .utils import rng_for


@dataclass
class LatticeSeq:
    """Nonnegative values on the truncated lattice [-radius, radius]^(dim*blocks)."""

    dim: int
    radius: int
    blocks: int
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        m = 2 * self.radius + 1
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (m,) * (self.dim * self.blocks):
            raise ShapeError(
                f"values shape {vals.shape} != lattice shape {(m,) * (self.dim * self.blocks)}"
            )
        if np.any(vals < 0):
            raise ParameterError("lattice values must be nonnegative")
        self.values = vals

    @property
    def axis(self) -> np.ndarray:
        return np.arange(-self.radius, self.radius + 1)

    def value(self, nu) -> float:
        idx = tuple(int(v) + self.radius for v in np.atleast_1d(nu))
        return float(self.values[idx])

    @classmethod
    def from_function(cls, fn, dim: int, radius: int, blocks: int = 1) -> "LatticeSeq":
        """Sample ``fn`` on the lattice; fn takes per-coordinate meshes."""
        ax = np.arange(-radius, radius + 1)
        mesh = np.meshgrid(*([ax] * (dim * blocks)), indexing="ij")
        return cls(dim, radius, blocks, np.asarray(fn(mesh), dtype=float))

    @classmethod
    def constant(cls, c: float, dim: int, radius: int, blocks: int = 1) -> "LatticeSeq":
        m = 2 * radius + 1
        return cls(dim, radius, blocks, np.full((m,) * (dim * blocks), float(c)))

    @classmethod
    def point_mass(cls, dim: int, radius: int, blocks: int = 1, value: float = 1.0) -> "LatticeSeq":
        m = 2 * radius + 1
        vals = np.zeros((m,) * (dim * blocks))
        vals[(radius,) * (dim * blocks)] = value
        return cls(dim, radius, blocks, vals)

    @classmethod
    def sum_power(cls, m_exp: float, dim: int, radius: int, blocks: int) -> "LatticeSeq":
        """(1 + |nu_1| + .. + |nu_N|)^m with per-slot Euclidean moduli."""

        def fn(mesh):
            total = 0.0
            for j in range(blocks):
                total = total + np.sqrt(
                    sum(mesh[j * dim + d].astype(float) ** 2 for d in range(dim))
                )
            return (1.0 + total) ** m_exp

        return cls.from_function(fn, dim, radius, blocks)

    @classmethod
    def product_power(cls, exps, dim: int, radius: int) -> "LatticeSeq":
        """prod_j (1 + |nu_j|)^(-a_j)."""
        exps = [float(a) for a in exps]

        def fn(mesh):
            out = 1.0
            for j, a in enumerate(exps):
                mod = np.sqrt(sum(mesh[j * dim + d].astype(float) ** 2 for d in range(dim)))
                out = out * (1.0 + mod) ** (-a)
            return out

        return cls.from_function(fn, dim, radius, len(exps))

    def restricted(self, radius: int) -> "LatticeSeq":
        if radius > self.radius:
            raise RangeError("cannot extend a lattice truncation")
        lo = self.radius - radius
        hi = self.radius + radius + 1
        sl = tuple([slice(lo, hi)] * (self.dim * self.blocks))
        return LatticeSeq(self.dim, radius, self.blocks, self.values[sl].copy())


# ---------------------------------------------------------------------------
# weight functions on (R^n)^N
# ---------------------------------------------------------------------------


def _slot_moduli(points: np.ndarray) -> np.ndarray:
    # points (..., nslots, dim) -> per-slot Euclidean moduli (..., nslots)
    pts = np.asarray(points, dtype=float)
    return np.sqrt(np.sum(pts**2, axis=-1))


class ConstantWeight:
    def __init__(self, c: float = 1.0):
        if not c > 0:
            raise ParameterError("constant weight must be positive")
        self.c = float(c)

    def __call__(self, points):
        return np.full(np.asarray(points).shape[:-2], self.c)


class PowerWeight:
    """(1 + |xi_1| + .. + |xi_N|)^m."""

    def __init__(self, m: float):
        self.m = float(m)

    def __call__(self, points):
        return (1.0 + _slot_moduli(points).sum(axis=-1)) ** self.m


class ProductWeight:
    """prod_j (1 + |xi_j|)^(-a_j)."""

    def __init__(self, exps):
        self.exps = np.asarray(exps, dtype=float)

    def __call__(self, points):
        mods = _slot_moduli(points)
        if mods.shape[-1] != self.exps.size:
            raise ShapeError("slot count does not match the exponent list")
        return np.prod((1.0 + mods) ** (-self.exps), axis=-1)


class LatticeStepWeight:
    """Piecewise-constant extension of a lattice sequence to (R^n)^N.

    Values are constant on unit cubes nu + Q; outside the truncation the
    weight is 0, which deliberately trips the moderate-class diagnostic.
    """

    def __init__(self, seq: LatticeSeq):
        self.seq = seq

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        nearest = np.floor(pts + 0.5).astype(int)
        r = self.seq.radius
        inside = np.all(np.abs(nearest) <= r, axis=(-2, -1))
        idx = np.clip(nearest + r, 0, 2 * r)
        flat = idx.reshape(idx.shape[:-2] + (-1,))
        lin = np.zeros(flat.shape[:-1], dtype=np.int64)
        for d in range(flat.shape[-1]):
            lin = lin * (2 * r + 1) + flat[..., d]
        vals = self.seq.values.ravel()[lin]
        return np.where(inside, vals, 0.0)


class LiftedWeight:
    """Moderate lift sum_mu V(mu) <xi - mu>^(-m_lift) of a lattice weight."""

    def __init__(self, seq: LatticeSeq, m_lift: float):
        if not m_lift > seq.blocks * seq.dim:
            raise ParameterError("lift exponent must exceed blocks*dim")
        self.seq = seq
        self.m_lift = float(m_lift)
        mesh = np.meshgrid(*([seq.axis] * (seq.dim * seq.blocks)), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
        keep = seq.values.ravel() > 0
        self._support = pts[keep]
        self._coeff = seq.values.ravel()[keep]

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, pts.shape[-2] * pts.shape[-1])
        out = np.zeros(flat.shape[0])
        chunk = max(1, int(2e7) // max(1, flat.shape[0]))
        for start in range(0, self._support.shape[0], chunk):
            sup = self._support[start : start + chunk]
            co = self._coeff[start : start + chunk]
            d2 = np.sum((flat[:, None, :] - sup[None, :, :]) ** 2, axis=-1)
            out += (co * (1.0 + d2) ** (-self.m_lift / 2.0)).sum(axis=1)
        return out.reshape(pts.shape[:-2])


def lift_to_moderate(seq: LatticeSeq, m_lift: float) -> LiftedWeight:
    """Lift a lattice weight to an everywhere-positive moderate weight.

    The lifted weight dominates the sequence at every lattice point (the
    mu = nu term alone contributes V(nu)).
    """
    return LiftedWeight(seq, m_lift)


# ---------------------------------------------------------------------------
# the multilinear form and its best-constant estimate
# ---------------------------------------------------------------------------


def _sum_index_map(dim: int, radius: int, blocks: int):
    """Linear indices of nu_1+..+nu_N into the [-b*r, b*r]^dim output box."""
    ax = np.arange(-radius, radius + 1)
    mesh = np.meshgrid(*([ax] * (dim * blocks)), indexing="ij")
    out_r = blocks * radius
    width = 2 * out_r + 1
    lin = np.zeros(mesh[0].shape, dtype=np.int64)
    for d in range(dim):
        s = sum(mesh[j * dim + d] for j in range(blocks))
        lin = lin * width + (s + out_r)
    return lin, width


def _block_shape(dim: int, radius: int, blocks: int, j: int):
    m = 2 * radius + 1
    shape = [1] * (dim * blocks)
    for d in range(dim):
        shape[(j - 1) * dim + d] = m
    return shape


def form_value(V: LatticeSeq, A) -> float:
    """Exact value of the form for given nonnegative sequences A_0..A_N."""
    n, N = V.dim, V.blocks
    if len(A) != N + 1:
        raise ShapeError(f"need {N + 1} sequences, got {len(A)}")
    for a in A:
        if a.blocks != 1 or a.dim != n:
            raise ShapeError("test sequences must be single-block with matching dim")
    lin, width = _sum_index_map(n, V.radius, N)
    G = V.values.copy()
    for j in range(1, N + 1):
        aj = A[j]
        if aj.radius != V.radius:
            aj = aj.restricted(V.radius) if aj.radius > V.radius else _pad(aj, V.radius)
        G *= aj.values.reshape(_block_shape(n, V.radius, N, j))
    a0 = _a0_on_box(A[0], n, N * V.radius)
    return float(np.sum(G * a0.ravel()[lin]))


def _pad(a: LatticeSeq, radius: int) -> LatticeSeq:
    m = 2 * radius + 1
    out = np.zeros((m,) * a.dim)
    lo = radius - a.radius
    hi = radius + a.radius + 1
    out[tuple([slice(lo, hi)] * a.dim)] = a.values
    return LatticeSeq(a.dim, radius, 1, out)


def _a0_on_box(a0: LatticeSeq, dim: int, out_r: int) -> np.ndarray:
    if a0.radius == out_r:
        return a0.values
    if a0.radius > out_r:
        return a0.restricted(out_r).values
    return _pad(a0, out_r).values


@dataclass
class FormConstantEstimate:
    """Best-constant estimate of the form on a truncation."""

    radius: int
    method: str
    value: float
    iterations: int
    converged: bool


def lattice_output_coefficients(V: LatticeSeq, A) -> LatticeSeq:
    """Convolution-type output coefficients d(k) = sum_{nu_1+..+nu_N=k} V prod A_j.

    ``A`` lists the N slot sequences (no A_0); the result lives on the
    summed box of radius N*V.radius.  Complex slot sequences are summed with
    the same index bookkeeping by the sharpness module; here everything is
    nonnegative.
    """
    n, N = V.dim, V.blocks
    if len(A) != N:
        raise ShapeError(f"need {N} slot sequences, got {len(A)}")
    lin, width = _sum_index_map(n, V.radius, N)
    G = V.values.copy()
    for j in range(1, N + 1):
        aj = A[j - 1]
        if aj.radius != V.radius:
            aj = aj.restricted(V.radius) if aj.radius > V.radius else _pad(aj, V.radius)
        G *= aj.values.reshape(_block_shape(n, V.radius, N, j))
    out = np.bincount(lin.ravel(), weights=G.ravel(), minlength=width**n)
    return LatticeSeq(n, N * V.radius, 1, out.reshape((width,) * n))


def form_constant(
    V: LatticeSeq,
    radius: int | None = None,
    method: str = "alternating",
    max_sweeps: int = 200,
    tol: float = 1e-9,
) -> FormConstantEstimate:
    """Estimate the best form constant on the truncation of given radius.

    alternating: cyclic closed-form slot updates (A_0 first, then A_1..A_N),
    monotone nondecreasing value, stopped at relative gain < tol.
    brute: exhaustive discretized search over one slot with exact solves of
    the induced two-slot problem, then an alternating polish; only for tiny
    two-slot instances, as a cross-check of the alternating fixed point.
    """
    if radius is None:
        radius = V.radius
    if radius > V.radius:
        raise RangeError("estimate radius exceeds the weight truncation")
    Vr = V.restricted(radius) if radius < V.radius else V
    if method == "alternating":
        return _alternating_estimate(Vr, max_sweeps, tol)
    if method == "brute":
        return _brute_estimate(Vr, max_sweeps, tol)
    raise ParameterError(f"unknown method {method!r}")


def _alternating_estimate(V: LatticeSeq, max_sweeps: int, tol: float) -> FormConstantEstimate:
    n, N = V.dim, V.blocks
    m = 2 * V.radius + 1
    lin, width = _sum_index_map(n, V.radius, N)
    lin_flat = lin.ravel()

    a_slots = [np.full((m,) * n, 1.0) for _ in range(N)]
    for a in a_slots:
        a /= np.linalg.norm(a)
    a0 = np.full((width,) * n, 1.0)
    a0 /= np.linalg.norm(a0)

    def slot_view(j, arr):
        return arr.reshape(_block_shape(n, V.radius, N, j))

    value = 0.0
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        # A_0 update
        G = V.values.copy()
        for j in range(1, N + 1):
            G *= slot_view(j, a_slots[j - 1])
        c0 = np.bincount(lin_flat, weights=G.ravel(), minlength=width**n)
        nrm = np.linalg.norm(c0)
        if nrm == 0.0:
            return FormConstantEstimate(V.radius, "alternating", 0.0, sweeps, True)
        a0 = (c0 / nrm).reshape((width,) * n)
        new_value = nrm
        # slot updates
        a0g = a0.ravel()[lin]
        for j in range(1, N + 1):
            H = V.values * a0g
            for i in range(1, N + 1):
                if i != j:
                    H *= slot_view(i, a_slots[i - 1])
            axes = tuple(
                ax for ax in range(n * N) if not (j - 1) * n <= ax < j * n
            )
            cj = H.sum(axis=axes) if axes else H
            nrm = np.linalg.norm(cj)
            if nrm == 0.0:
                return FormConstantEstimate(V.radius, "alternating", 0.0, sweeps, True)
            a_slots[j - 1] = cj / nrm
            new_value = nrm
        if not np.isfinite(new_value):
            return FormConstantEstimate(V.radius, "alternating", math.inf, sweeps, False)
        if value > 0 and (new_value - value) / value < tol:
            value = new_value
            converged = True
            break
        value = new_value
    return FormConstantEstimate(V.radius, "alternating", float(value), sweeps, converged)


def _brute_estimate(V: LatticeSeq, max_sweeps: int, tol: float, levels: int = 8) -> FormConstantEstimate:
    if V.blocks != 2 or V.dim != 1:
        raise ParameterError("brute search is limited to two slots in dimension 1")
    m = 2 * V.radius + 1
    if (levels + 1) ** m > 10**6:
        raise ParameterError("brute search instance too large")
    width = 4 * V.radius + 1
    # T[nu1, k, nu2] = V[nu1, nu2] when nu1 + nu2 = k
    T = np.zeros((m, width, m))
    for i1 in range(m):
        for i2 in range(m):
            T[i1, i1 + i2, i2] = V.values[i1, i2]
    grid_vals = np.arange(levels + 1) / levels
    profiles = np.array(list(itertools.product(grid_vals, repeat=m)))
    profiles = profiles[np.any(profiles > 0, axis=1)]
    norms = np.linalg.norm(profiles, axis=1)
    profiles = profiles / norms[:, None]
    # K[b] = sum_nu1 profiles[b, nu1] T[nu1] ; best value = sigma_max(K[b])
    K = np.tensordot(profiles, T.reshape(m, -1), axes=(1, 0)).reshape(-1, width, m)
    G = np.einsum("bkm,bkl->bml", K, K)
    lam = np.linalg.eigvalsh(G)[:, -1]
    best = int(np.argmax(lam))
    sigma = math.sqrt(max(lam[best], 0.0))
    # polish: alternating sweeps from the best discrete profile
    a1 = profiles[best]
    value = sigma
    for it in range(max_sweeps):
        Kb = np.tensordot(a1, T.reshape(m, -1), axes=(0, 0)).reshape(width, m)
        u, s, vt = np.linalg.svd(Kb)
        a0, a2 = np.abs(u[:, 0]), np.abs(vt[0])
        # exact update of slot 1 given (a0, a2)
        c1 = np.einsum("k,ikj,j->i", a0, T, a2)
        nrm = np.linalg.norm(c1)
        if nrm == 0.0:
            return FormConstantEstimate(V.radius, "brute", 0.0, it + 1, True)
        a1 = c1 / nrm
        if value > 0 and (nrm - value) / value < tol:
            return FormConstantEstimate(V.radius, "brute", float(nrm), it + 1, True)
        value = nrm
    return FormConstantEstimate(V.radius, "brute", float(value), max_sweeps, False)


# ---------------------------------------------------------------------------
# moderate-class diagnostic and slot transform
# ---------------------------------------------------------------------------


@dataclass
class ModerateReport:
    c_est: float
    m_est: float
    passed: bool


def moderate_check(
    weight,
    nslots: int,
    dim: int,
    sample_count: int = 2000,
    box_radius: float = 64.0,
    seed: int = 0,
) -> ModerateReport:
    """Sampled translation-distortion diagnostic for a weight function.

    Searches for the smallest balanced pair (M, C) with C <= 2^M such that
    F(xi+eta) <= C F(xi) <eta>^M on all sampled pairs; a weight vanishing at
    a sample fails outright.  Smallness of the returned exponent, not the
    exact value, is the diagnostic.
    """
    rng = rng_for(seed, 20)
    xi = rng.uniform(-box_radius, box_radius, size=(sample_count, nslots, dim))
    eta = rng.uniform(-box_radius, box_radius, size=(sample_count, nslots, dim))
    f_xi = np.asarray(weight(xi), dtype=float)
    f_shift = np.asarray(weight(xi + eta), dtype=float)
    if np.any(f_xi <= 0) or np.any(~np.isfinite(f_xi)) or np.any(~np.isfinite(f_shift)):
        return ModerateReport(math.inf, math.inf, False)
    y = np.log(f_shift / f_xi)
    x = np.log(np.sqrt(1.0 + np.sum(eta.reshape(sample_count, -1) ** 2, axis=1)))

    def feasible(t):
        return np.max(y - t * x) <= t * math.log(2.0)

    hi = 1.0
    while not feasible(hi):
        hi *= 2.0
        if hi > 512.0:
            return ModerateReport(math.inf, math.inf, False)
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    m_est = hi
    c_est = float(np.exp(np.max(y - m_est * x)))
    return ModerateReport(max(c_est, 1.0), m_est, True)


def slot_transform(V: LatticeSeq, j: int) -> LatticeSeq:
    """Slot-j transform: V(-nu_1, .., nu_1+..+nu_N at slot j, .., -nu_N)."""
    n, N = V.dim, V.blocks
    if N < 2:
        raise ParameterError("slot transform needs at least two slots")
    if not 1 <= j <= N:
        raise RangeError(f"slot {j} outside 1..{N}")
    ax = V.axis
    mesh = np.meshgrid(*([ax] * (n * N)), indexing="ij")
    out = np.zeros_like(V.values)
    coords = []
    for i in range(1, N + 1):
        if i == j:
            coords.append(
                [sum(mesh[(jj - 1) * n + d] for jj in range(1, N + 1)) for d in range(n)]
            )
        else:
            coords.append([-mesh[(i - 1) * n + d] for d in range(n)])
    flat = [c for block in coords for c in block]
    inside = np.ones(mesh[0].shape, dtype=bool)
    for c in flat:
        inside &= np.abs(c) <= V.radius
    idx = tuple(np.clip(c + V.radius, 0, 2 * V.radius) for c in flat)
    out[inside] = V.values[idx][inside]
    return LatticeSeq(n, V.radius, N, out)


def slot_transform_ratio(
    V: LatticeSeq, j: int, radius: int | None = None, method: str = "alternating"
) -> float:
    """Ratio of form-constant estimates for V and its slot-j transform."""
    base = form_constant(V, radius, method).value
    trans = form_constant(slot_transform(V, j), radius, method).value
    if trans == 0.0:
        return math.inf
    return base / trans


# ---------------------------------------------------------------------------
# weight zoo
# ---------------------------------------------------------------------------


def load_lattice_seq(path, dim: int | None = None, blocks: int | None = None) -> LatticeSeq:
    """Load a lattice sequence from .json ({dim, radius, blocks, values}) or .npy."""
    p = Path(path)
    if p.suffix == ".json":
        doc = json.loads(p.read_text())
        vals = np.asarray(doc["values"], dtype=float)
        m = 2 * doc["radius"] + 1
        return LatticeSeq(
            doc["dim"], doc["radius"], doc["blocks"], vals.reshape((m,) * (doc["dim"] * doc["blocks"]))
        )
    if p.suffix == ".npy":
        vals = np.load(p)
        if dim is None or blocks is None:
            raise ParameterError(".npy lattice files need explicit dim and blocks")
        m = vals.shape[0]
        if m % 2 == 0:
            raise ParameterError("lattice axis length must be odd (radius*2+1)")
        return LatticeSeq(dim, (m - 1) // 2, blocks, vals)
    raise ParameterError(f"unsupported lattice file {p.suffix!r}")


def parse_weight(spec: str, nslots: int, dim: int, basedir=None):
    """Weight zoo: const | power:m | product:a1,..,aN | lorentz-sample:file | table:file."""
    name, _, arg = spec.partition(":")
    if name == "const":
        return ConstantWeight(float(arg) if arg else 1.0)
    if name == "power":
        return PowerWeight(float(arg))
    if name == "product":
        exps = [float(v) for v in arg.split(",")]
        if len(exps) != nslots:
            raise ParameterError(f"product weight needs {nslots} exponents")
        return ProductWeight(exps)
    if name in ("lorentz-sample", "table"):
        path = Path(basedir or ".") / arg
        return LatticeStepWeight(load_lattice_seq(path, dim, nslots))
    raise ParameterError(f"unknown weight id {spec!r}")
