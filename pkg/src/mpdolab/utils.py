"""Small shared helpers: log-log slope fits and deterministic RNG streams."""

from __future__ import annotations

import numpy as np


def fit_log2_slope(xs, ys):
    """Ordinary least squares of log2(ys) against log2(xs).

    Returns (slope, intercept, max_abs_residual).  All growth claims handled
    by the toolkit are power laws, so fits are always done on log2 values.
    """
    x = np.log2(np.asarray(xs, dtype=float))
    y = np.log2(np.asarray(ys, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points for a slope fit")
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    return float(coef[0]), float(coef[1]), float(np.max(np.abs(resid)))


def rng_for(*key) -> np.random.Generator:
    """Deterministic generator derived from an integer key tuple.

    Independent jobs (trials, radii, dilation exponents) derive their own
    stream from (master_seed, job_index, ...) so results do not depend on
    scheduling order or thread count.
    """
    return np.random.default_rng(list(key))
