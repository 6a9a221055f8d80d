"""Classical divergence statistics and the chi-square distribution.

All statistics compare an observed probability vector (usually the MLE
``counts / n``) with a strictly positive null vector and are scaled by the
sample size ``n``.  Zero observed cells follow the convention ``0 * ln 0 = 0``.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from .special import gamma_log_density, gammainc_lower, gammainc_upper

ArrayLike = Union[Sequence[float], np.ndarray]

SUM_TOL = 1e-10
QUANTILE_TOL = 1e-12


class StructuralZeroError(ValueError):
    """A null probability is zero, so the statistic is undefined."""


def as_prob_vector(p: ArrayLike, *, strictly_positive: bool = False, name: str = "p") -> np.ndarray:
    """Validate and return ``p`` as a read-only float64 array.

    Raises ``ValueError`` unless ``p`` is one-dimensional with at least two
    nonnegative entries summing to one within ``1e-10``.  With
    ``strictly_positive`` a zero entry raises :class:`StructuralZeroError`.
    """
    arr = np.array(p, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError(f"{name} needs at least 2 categories, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    total = math.fsum(arr)
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"{name} sums to {total!r}, expected 1")
    if strictly_positive and np.any(arr == 0):
        zeros = np.flatnonzero(arr == 0).tolist()
        raise StructuralZeroError(f"{name} has zero entries at {zeros}")
    arr.flags.writeable = False
    return arr


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n!r}")
    return int(n)


def _pair(null: ArrayLike, observed: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    p0 = as_prob_vector(null, strictly_positive=True, name="null")
    p = as_prob_vector(observed, name="observed")
    if p0.shape != p.shape:
        raise ValueError(f"dimension mismatch: null has {p0.size} cells, observed has {p.size}")
    return p0, p


def _q(p0: np.ndarray, p: np.ndarray, n: int) -> float:
    return n * math.fsum((p - p0) ** 2 / p0)


def _g(p0: np.ndarray, p: np.ndarray, n: int) -> float:
    nz = p > 0
    value = 2.0 * n * math.fsum(p[nz] * np.log(p[nz] / p0[nz]))
    # Gibbs' inequality; clamp round-off below zero
    return max(value, 0.0)


def _rc(lam: float, p0: np.ndarray, p: np.ndarray, n: int) -> float:
    nz = p > 0
    # expm1 keeps the small-lambda limit accurate
    terms = p[nz] * np.expm1(lam * np.log(p[nz] / p0[nz]))
    return 2.0 * n / (lam * (lam + 1.0)) * math.fsum(terms)


def pearson_q(null: ArrayLike, observed: ArrayLike, n: int) -> float:
    """Pearson's chi-square statistic ``n * sum((observed - null)**2 / null)``."""
    p0, p = _pair(null, observed)
    return _q(p0, p, _check_n(n))


def kullback_g(null: ArrayLike, observed: ArrayLike, n: int) -> float:
    """Kullback's discrimination information ``2n * sum(observed * ln(observed / null))``."""
    p0, p = _pair(null, observed)
    return _g(p0, p, _check_n(n))


def power_divergence(lam: float, null: ArrayLike, observed: ArrayLike, n: int) -> float:
    """Read-Cressie power divergence ``RC^lam``.

    ``lam = 1`` gives Pearson's Q, ``lam = 0`` dispatches to :func:`kullback_g`.
    ``lam = -1`` is rejected; for ``lam <= -1`` zero observed cells make the
    statistic infinite, so only ``lam > -1`` is supported.
    """
    if lam == 0:
        return kullback_g(null, observed, n)
    if lam <= -1:
        raise ValueError(f"power divergence requires lambda > -1, got {lam}")
    p0, p = _pair(null, observed)
    return _rc(lam, p0, p, _check_n(n))


def ku_corrected_g(null: ArrayLike, observed: ArrayLike, n: int, c: int | None = None) -> float:
    """Ku's correction: ``G`` minus one per zero observed cell.

    ``c`` defaults to the number of zero entries in ``observed``.
    """
    g = kullback_g(null, observed, n)
    if c is None:
        c = int(np.count_nonzero(np.asarray(observed) == 0))
    if c < 0:
        raise ValueError(f"zero count must be nonnegative, got {c}")
    return g - c


def _check_df(df: int) -> int:
    if isinstance(df, bool) or int(df) != df or df < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {df!r}")
    return int(df)


def chi_square_cdf(x: float, df: int) -> float:
    """Chi-square CDF, ``P(df/2, x/2)``."""
    df = _check_df(df)
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return gammainc_lower(df / 2.0, x / 2.0)


def chi_square_sf(x: float, df: int) -> float:
    """Chi-square survival function (upper-tail p-value)."""
    df = _check_df(df)
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return gammainc_upper(df / 2.0, x / 2.0)


def _chi_square_pdf(x: float, df: int) -> float:
    if x <= 0:
        return 0.0
    return 0.5 * math.exp(gamma_log_density(df / 2.0, x / 2.0))


def chi_square_quantile(prob: float, df: int) -> float:
    """Inverse of :func:`chi_square_cdf`.

    Safeguarded Newton iteration inside a bisection bracket.  The error is
    measured on the smaller tail (CDF below the median, survival function
    above it) and the iteration stops once it is within ``1e-12`` of that
    tail probability, or the bracket collapses to machine precision.
    """
    df = _check_df(df)
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {prob}")

    upper = prob > 0.5
    tail = 1.0 - prob if upper else prob

    def tail_error(x: float) -> float:
        # signed so that a positive error means x is too large
        if upper:
            return (1.0 - prob) - chi_square_sf(x, df)
        return chi_square_cdf(x, df) - prob

    lo, hi = 0.0, max(float(df), 1.0)
    while tail_error(hi) < 0:
        lo, hi = hi, 2.0 * hi

    # Wilson-Hilferty starting point, clipped into the bracket
    z = math.sqrt(2.0) * _erfinv(2.0 * prob - 1.0)
    k = 2.0 / (9.0 * df)
    x = df * max(1.0 - k + z * math.sqrt(k), 1e-3) ** 3
    if not lo < x < hi:
        x = 0.5 * (lo + hi)

    for _ in range(500):
        err = tail_error(x)
        if abs(err) <= QUANTILE_TOL * tail:
            return x
        if err < 0:
            lo = x
        else:
            hi = x
        dens = _chi_square_pdf(x, df)
        step = x - err / dens if dens > 0 else math.nan
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(hi):
            return x
    return x


def _erfinv(y: float) -> float:
    # Rough inverse error function, only used to seed the root finder.
    a = 0.147
    ln = math.log(1.0 - y * y)
    first = 2.0 / (math.pi * a) + ln / 2.0
    return math.copysign(math.sqrt(math.sqrt(first * first - ln / a) - first), y)
