"""Zero-count corrections for Pearson's Q and Kullback's G.

The maximum likelihood estimator ``counts / n`` puts no mass on empty cells
and too much on the others.  The corrected estimator ``p_hat(a, b)`` assigns
``a`` to every zero cell and ``n_j / n**b - d`` to every nonzero cell, where
``d = (a*c + n**(1-b) - 1) / (R - c)`` makes the vector sum to one.  The
admissible ``(a, b)`` region keeps every entry inside ``(0, 1)`` and makes
each zero cell at most ``1/n`` times as likely as any observed cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core_stats import _g, _q, as_prob_vector, kullback_g, pearson_q

DEFAULT_H = 0.1
DEFAULT_EPS_FRACTION = 1e-3

#: Enumeration limits for :func:`likelihood_inequality_oracle`.
ORACLE_MAX_N = 12
ORACLE_MAX_R = 5


@dataclass(frozen=True)
class CountVector:
    """Observed cell frequencies with zero-cell bookkeeping."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.counts)
        if arr.ndim != 1:
            raise ValueError(f"counts must be one-dimensional, got shape {arr.shape}")
        if arr.size < 2:
            raise ValueError("counts need at least 2 cells")
        if arr.dtype.kind == "f":
            if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
                raise ValueError("counts must be integers")
        elif arr.dtype.kind not in "iu":
            raise ValueError(f"counts must be integers, got dtype {arr.dtype}")
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValueError("counts must be nonnegative")
        if arr.sum() == 0:
            raise ValueError("counts are all zero")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def R(self) -> int:
        return int(self.counts.size)

    @property
    def zero_index(self) -> np.ndarray:
        return np.flatnonzero(self.counts == 0)

    @property
    def nonzero_index(self) -> np.ndarray:
        return np.flatnonzero(self.counts > 0)

    @property
    def c(self) -> int:
        return int(np.count_nonzero(self.counts == 0))

    def mle(self) -> np.ndarray:
        return self.counts / self.n


CountsLike = Union[CountVector, Sequence[int], np.ndarray]


def as_counts(counts: CountsLike) -> CountVector:
    return counts if isinstance(counts, CountVector) else CountVector(np.asarray(counts))


@dataclass(frozen=True)
class SparsityStats:
    n_lo: int
    n_hi: int
    n_lolo: int
    n_hihi: int
    uniform: bool


@dataclass(frozen=True)
class EpsPolicy:
    """Boundary offset ``eps`` as a fraction of the admissible ``a`` interval."""

    fraction: float = DEFAULT_EPS_FRACTION

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction < 1.0:
            raise ValueError(f"eps fraction must lie in (0, 1), got {self.fraction}")

    def eps(self, a_min: float, a_max: float) -> float:
        return self.fraction * (a_max - a_min)


@dataclass(frozen=True)
class CorrectionParams:
    """Chosen ``(a, b)`` with the bounds they were drawn from.

    ``fallback`` marks the degenerate regime where the corrected estimator is
    the MLE (``a = 0``, ``b = 1``); ``reason`` says why.
    """

    a: float
    b: float
    h: float = DEFAULT_H
    eps: float = 0.0
    b_min: float = math.nan
    b_max: float = 1.0
    a_min: float = math.nan
    a_max: float = math.nan
    fallback: bool = False
    reason: str | None = None

    def d(self, counts: CountsLike) -> float:
        """Deflation of the nonzero cells implied by the sum-to-one constraint."""
        cv = as_counts(counts)
        if self.fallback:
            return 0.0
        return (self.a * cv.c + cv.n ** (1.0 - self.b) - 1.0) / (cv.R - cv.c)

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "h": self.h,
            "eps": self.eps,
            "b_min": self.b_min,
            "b_max": self.b_max,
            "a_min": self.a_min,
            "a_max": self.a_max,
            "fallback": self.fallback,
            "reason": self.reason,
        }


def fallback_params(h: float = DEFAULT_H, reason: str | None = None) -> CorrectionParams:
    return CorrectionParams(a=0.0, b=1.0, h=h, fallback=True, reason=reason)


def sparsity_stats(counts: CountsLike) -> SparsityStats:
    """Spread of the nonzero counts.

    ``n_lolo = n - n_lo * (R - c)`` and ``n_hihi = n_hi * (R - c) - n`` are
    both positive unless every nonzero cell holds the same count.
    """
    cv = as_counts(counts)
    nonzero = cv.counts[cv.counts > 0]
    n_lo = int(nonzero.min())
    n_hi = int(nonzero.max())
    k = nonzero.size
    return SparsityStats(
        n_lo=n_lo,
        n_hi=n_hi,
        n_lolo=cv.n - n_lo * k,
        n_hihi=n_hi * k - cv.n,
        uniform=n_lo == n_hi,
    )


def b_bounds(counts: CountsLike, stats: SparsityStats | None = None) -> tuple[float, float]:
    """Open interval ``(b_min, 1)`` of admissible exponents."""
    cv = as_counts(counts)
    stats = stats or sparsity_stats(cv)
    if stats.uniform:
        raise ValueError("b bounds are undefined when all nonzero counts are equal")
    if cv.c < 1:
        raise ValueError("b bounds need at least one zero cell")
    if cv.n < 2:
        raise ValueError("b bounds need n >= 2")
    log_n = math.log(cv.n)
    b_min = max(
        0.0,
        math.log(stats.n_hihi / (cv.R - 1)) / log_n,
        math.log(stats.n_lolo) / log_n,
        math.log(stats.n_hi - stats.n_lo) / log_n,
    )
    return b_min, 1.0


def a_bounds(b: float, counts: CountsLike, stats: SparsityStats | None = None) -> tuple[float, float]:
    """Interval ``(a_min(b), a_max(b))`` for the zero-cell mass.

    May be empty (``a_min >= a_max``); callers decide what to do with that.
    """
    cv = as_counts(counts)
    stats = stats or sparsity_stats(cv)
    if cv.c < 1:
        raise ValueError("a bounds need at least one zero cell")
    n, R, c = cv.n, cv.R, cv.c
    nb = math.exp(b * math.log(n))
    a_min = max(0.0, ((stats.n_hi - nb) * (R - c) + nb) / (c * nb))
    a_max = min(
        1.0,
        (nb - stats.n_lolo) / (c * nb),
        (nb - stats.n_lolo) / (nb * (n * (R - c) + c)),
    )
    return a_min, a_max


def choose_ab(
    counts: CountsLike,
    h: float = DEFAULT_H,
    eps_policy: EpsPolicy | None = None,
) -> CorrectionParams:
    """Pick ``b = h + (1 - h) * b_min`` and ``a = a_max(b) - eps``.

    Degenerate inputs (no zeros, all nonzero counts equal, or an empty
    ``a`` interval) never raise: they return fallback parameters whose
    estimator is the MLE.
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"h must lie in (0, 1), got {h}")
    eps_policy = eps_policy or EpsPolicy()
    cv = as_counts(counts)
    if cv.c == 0:
        return fallback_params(h)
    stats = sparsity_stats(cv)
    if stats.uniform:
        return fallback_params(h, "all nonzero counts are equal; correction undefined")

    b_min, b_max = b_bounds(cv, stats)
    b = h * b_max + (1.0 - h) * b_min
    a_min, a_max = a_bounds(b, cv, stats)
    if not a_min < a_max:
        return CorrectionParams(
            a=0.0, b=1.0, h=h, b_min=b_min, a_min=a_min, a_max=a_max, fallback=True,
            reason=f"empty admissible interval for a at b={b:.6g}: [{a_min:.6g}, {a_max:.6g}]",
        )
    eps = eps_policy.eps(a_min, a_max)
    params = CorrectionParams(
        a=a_max - eps, b=b, h=h, eps=eps, b_min=b_min, b_max=b_max, a_min=a_min, a_max=a_max,
    )
    p_hat = corrected_estimator(cv, params)
    if not (np.all((p_hat > 0) & (p_hat < 1)) and cond2_check(p_hat, cv)):
        # only reachable through round-off at the interval edges
        return CorrectionParams(
            a=0.0, b=1.0, h=h, b_min=b_min, a_min=a_min, a_max=a_max, fallback=True,
            reason="corrected estimator left the admissible region numerically",
        )
    return params


def corrected_estimator(counts: CountsLike, params: CorrectionParams) -> np.ndarray:
    """The corrected probability vector ``p_hat(a, b)``."""
    cv = as_counts(counts)
    if params.fallback:
        return cv.mle()
    if cv.c == 0:
        raise ValueError("non-fallback parameters given for counts without zero cells")
    n = cv.n
    nb = math.exp(params.b * math.log(n))
    d = params.d(cv)
    p_hat = np.where(cv.counts > 0, cv.counts / nb - d, params.a)
    return p_hat


def cond2_check(p: Sequence[float] | np.ndarray, counts: CountsLike) -> bool:
    """True iff every zero cell has ``p_i <= p_j / n`` for every nonzero cell ``j``."""
    cv = as_counts(counts)
    p = np.asarray(p, dtype=np.float64)
    if p.shape != cv.counts.shape:
        raise ValueError(f"dimension mismatch: {p.size} probabilities for {cv.R} cells")
    if cv.c == 0:
        return True
    return bool(p[cv.zero_index].max() <= p[cv.nonzero_index].min() / cv.n)


def _log_multinomial_kernel(y: Sequence[int], log_p: np.ndarray) -> float:
    # log of prod p_r**y_r / y_r!; the n! factor is common to every alternative
    total = 0.0
    for yr, lp in zip(y, log_p):
        if yr:
            total += yr * lp - math.lgamma(yr + 1)
    return total


def likelihood_inequality_oracle(p: Sequence[float] | np.ndarray, counts: CountsLike) -> bool:
    """Brute-force check that the observed counts are the most likely outcome.

    Enumerates every vector reachable by moving observations out of nonzero
    cells (never raising any of them) into any subset of the zero cells, and
    compares multinomial probabilities under ``p``.  Only feasible for small
    instances (``n <= 12``, ``R <= 5``).
    """
    cv = as_counts(counts)
    p = np.asarray(p, dtype=np.float64)
    if p.shape != cv.counts.shape:
        raise ValueError(f"dimension mismatch: {p.size} probabilities for {cv.R} cells")
    if cv.n > ORACLE_MAX_N or cv.R > ORACLE_MAX_R:
        raise ValueError(
            f"instance too large for enumeration (n={cv.n}, R={cv.R}; "
            f"limits n<={ORACLE_MAX_N}, R<={ORACLE_MAX_R})"
        )
    if cv.c == 0:
        return True
    if np.any(p[cv.nonzero_index] <= 0):
        return False
    with np.errstate(divide="ignore"):
        log_p = np.log(p)

    observed = _log_multinomial_kernel(cv.counts, log_p)
    tol = 1e-12 * max(1.0, abs(observed))
    n = cv.n
    ranges = [
        range(0, int(k) + 1) if k > 0 else range(0, n + 1)
        for k in cv.counts
    ]
    for y in itertools.product(*ranges):
        if sum(y) != n:
            continue
        if any(y[i] > 0 and p[i] == 0 for i in cv.zero_index):
            continue
        if _log_multinomial_kernel(y, log_p) > observed + tol:
            return False
    return True


def _f_term(null: np.ndarray, cv: CountVector, params: CorrectionParams) -> float:
    n, R, c = cv.n, cv.R, cv.c
    nz, z = cv.nonzero_index, cv.zero_index
    lift = math.exp((1.0 - params.b) * math.log(n))
    d = (params.a * c + lift - 1.0) / (R - c)
    s_ratio = math.fsum(cv.counts[nz] / (n * null[nz]))
    s_inv_nz = math.fsum(1.0 / null[nz])
    s_inv_z = math.fsum(1.0 / null[z])
    return n * math.fsum(
        [1.0, -lift * lift, 2.0 * lift * d * s_ratio, -params.a ** 2 * s_inv_z, -d * d * s_inv_nz]
    )


def _g_term(null: np.ndarray, cv: CountVector, params: CorrectionParams) -> float:
    n, R, c = cv.n, cv.R, cv.c
    nz, z = cv.nonzero_index, cv.zero_index
    a = params.a
    nb = math.exp(params.b * math.log(n))
    lift = n / nb
    shift = a * c + lift - 1.0
    n_j = cv.counts[nz].astype(np.float64)
    core = n_j * (R - c) - nb * shift
    if np.any(core <= 0):
        raise ValueError("parameters give a nonpositive corrected probability")
    first = shift / (R - c) * math.fsum(np.log(core / (null[nz] * nb * (R - c))))
    second = a * math.fsum(np.log(a / null[z]))
    third = lift * math.fsum(n_j / n * np.log(core / (n_j * (nb / n) * (R - c))))
    return 2.0 * n * math.fsum([first, -second, -third])


def _prepare(null, counts: CountsLike) -> tuple[np.ndarray, CountVector]:
    cv = as_counts(counts)
    p0 = as_prob_vector(null, strictly_positive=True, name="null")
    if p0.size != cv.R:
        raise ValueError(f"dimension mismatch: null has {p0.size} cells, counts have {cv.R}")
    return p0, cv


def corrected_q(null, counts: CountsLike, params: CorrectionParams) -> float:
    """Corrected Pearson statistic via ``n**(2(1-b)) * Q - f(a, b)``."""
    p0, cv = _prepare(null, counts)
    return _corrected_q(p0, cv, params)


def _corrected_q(p0: np.ndarray, cv: CountVector, params: CorrectionParams) -> float:
    q = _q(p0, cv.mle(), cv.n)
    if params.fallback:
        return q
    scale = math.exp(2.0 * (1.0 - params.b) * math.log(cv.n))
    return scale * q - _f_term(p0, cv, params)


def corrected_g(null, counts: CountsLike, params: CorrectionParams) -> float:
    """Corrected Kullback statistic via ``n**(1-b) * G - g(a, b)``."""
    p0, cv = _prepare(null, counts)
    return _corrected_g(p0, cv, params)


def _corrected_g(p0: np.ndarray, cv: CountVector, params: CorrectionParams) -> float:
    g = _g(p0, cv.mle(), cv.n)
    if params.fallback:
        return g
    scale = math.exp((1.0 - params.b) * math.log(cv.n))
    return scale * g - _g_term(p0, cv, params)


def corrected_q_direct(null, counts: CountsLike, params: CorrectionParams) -> float:
    """``Q`` evaluated on the corrected estimator; cross-check for :func:`corrected_q`."""
    p0, cv = _prepare(null, counts)
    return pearson_q(p0, _checked_sum(corrected_estimator(cv, params)), cv.n)


def corrected_g_direct(null, counts: CountsLike, params: CorrectionParams) -> float:
    """``G`` evaluated on the corrected estimator; cross-check for :func:`corrected_g`."""
    p0, cv = _prepare(null, counts)
    p_hat = corrected_estimator(cv, params)
    if np.any(p_hat <= 0):
        raise ValueError("parameters give a nonpositive corrected probability")
    return kullback_g(p0, _checked_sum(p_hat), cv.n)


def _checked_sum(p: np.ndarray) -> np.ndarray:
    total = math.fsum(p)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"corrected estimator sums to {total!r}")
    return p


__all__ = [
    "CorrectionParams",
    "CountVector",
    "EpsPolicy",
    "SparsityStats",
    "a_bounds",
    "as_counts",
    "b_bounds",
    "choose_ab",
    "cond2_check",
    "corrected_estimator",
    "corrected_g",
    "corrected_g_direct",
    "corrected_q",
    "corrected_q_direct",
    "fallback_params",
    "likelihood_inequality_oracle",
    "sparsity_stats",
]
