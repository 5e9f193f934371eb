"""Smooth compactly supported bumps, evaluated analytically at sample points.

Everything here is built from the classical exp(-1/t) mollifier so supports
are exact: a flat-top profile equal to 1 inside, 0 outside, and a C-infinity
ramp in between.  The dyadic frequency partition, the unit translation
partition, and all test-symbol bumps are assembled from these.
"""

from __future__ import annotations

import numpy as np


def _expm(t):
    # exp(-1/t) for t > 0, 0 elsewhere; vectorized without warnings
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t):
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    a = _expm(t)
    b = _expm(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def flat_top(r, inner: float, outer: float):
    """Radial flat-top profile: 1 for r <= inner, 0 for r >= outer."""
    return 1.0 - smoothstep((np.asarray(r, dtype=float) - inner) / (outer - inner))


def dyadic_base(r):
    """Flat-top base of the dyadic partition: 1 on |y|<=1, support |y|<=2."""
    return flat_top(r, 1.0, 2.0)


def dyadic_shell(k: int, r):
    """Shell k of the telescoped dyadic partition (shell 0 is the base)."""
    r = np.asarray(r, dtype=float)
    if k == 0:
        return dyadic_base(r)
    return dyadic_base(r / 2.0**k) - dyadic_base(r / 2.0 ** (k - 1))


def bump(r, width: float):
    """Plain even bump exp(-1/(1-(r/width)^2)) with support |r| < width."""
    u = np.asarray(r, dtype=float) / width
    return _expm(1.0 - u**2)


def axis_flat_bump(t, inner: float, outer: float):
    """Per-axis flat bump: 1 on |t|<=inner, support |t|<=outer."""
    return flat_top(np.abs(np.asarray(t, dtype=float)), inner, outer)


def unit_partition_1d(t):
    """C-infinity phi with supp in [-1,1] and sum_k phi(t-k) = 1."""
    t = np.asarray(t, dtype=float)
    return smoothstep(t + 1.0) - smoothstep(t)


def tensor_eval(fn1d, meshes):
    """Product of a 1-d profile over the axes of a coordinate mesh list."""
    out = np.ones_like(np.asarray(meshes[0], dtype=float))
    for m in meshes:
        out = out * fn1d(m)
    return out


def radius(meshes):
    """Euclidean radius over a coordinate mesh list."""
    return np.sqrt(sum(np.asarray(m, dtype=float) ** 2 for m in meshes))


def inverse_transform_profile(profile1d, support: float, x, nodes: int = 400):
    """(2*pi)^{-1} int exp(i x xi) profile(xi) dxi for an even 1-d profile.

    Gauss-Legendre quadrature over [-support, support]; spectrally accurate
    for the smooth compactly supported profiles used here.  ``x`` may be any
    array of evaluation points.
    """
    nodes_, weights = np.polynomial.legendre.leggauss(nodes)
    xi = support * nodes_
    w = support * weights
    vals = profile1d(xi) * w
    x = np.asarray(x, dtype=float)
    # cos suffices: the profile is even
    return (np.cos(np.multiply.outer(x, xi)) @ vals) / (2.0 * np.pi)
