"""Seeded Monte Carlo study of the statistics on sparse multinomial samples.

Every replicate ``i`` draws from its own PCG64 stream seeded by
``SeedSequence(seed, spawn_key=(i,))``, so results depend only on the seed
and the replicate index, never on how replicates are distributed across
workers.

Rejection rates are reported three ways: over all replicates, inside each
zero-count bucket ``c``, and inside the modal bucket.  Per-bucket figures
carry their replicate counts so thin buckets can be discounted.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core_stats import as_prob_vector, chi_square_quantile
from .corrections import CountVector, EpsPolicy, choose_ab
from .models import STATISTICS, compute_statistics

RNG_ALGORITHM = "numpy PCG64, per-replicate SeedSequence(seed, spawn_key=(replicate,))"
QUANTILE_LEVEL = 0.95
DEFAULT_ALPHAS = (0.01, 0.05, 0.1)
PERTURBATION = 1.0 / 300.0

_LOW = Fraction(2, 10_000)
_BUILTIN = {
    # name: number of low-probability cells out of 100
    "f1": 20,
    "f2": 50,
    "f3": 70,
    "f4": 90,
}


def builtin_distribution(name: str) -> np.ndarray:
    """One of the four 100-cell test distributions.

    ``k`` cells of probability 0.0002 followed by ``100 - k`` cells sharing
    the remaining mass equally (k = 20, 50, 70, 90 for f1..f4).
    """
    try:
        k = _BUILTIN[name]
    except KeyError:
        raise KeyError(f"unknown distribution {name!r}; choose from {sorted(_BUILTIN)}") from None
    high = (1 - k * _LOW) / (100 - k)
    return np.array([float(_LOW)] * k + [float(high)] * (100 - k))


def perturb_distribution(f: Sequence[float] | np.ndarray, delta: float = PERTURBATION) -> np.ndarray:
    """Move ``delta`` onto each of the first 10 cells, taking it from the last 10.

    A negative ``delta`` undoes the perturbation.
    """
    f = np.array(f, dtype=np.float64)
    if f.shape != (100,):
        raise ValueError(f"perturbation is defined for 100 cells, got {f.size}")
    out = f.copy()
    out[:10] += delta
    out[90:] -= delta
    if np.any(out <= 0):
        raise ValueError("perturbation makes some probabilities nonpositive")
    return out


def sample_multinomial(p: Sequence[float] | np.ndarray, n: int, rng: np.random.Generator) -> CountVector:
    """Draw ``M(n; p)`` as ``n`` inverse-CDF categorical draws."""
    p = as_prob_vector(p)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    return _draw(cdf, n, rng)


def _draw(cdf: np.ndarray, n: int, rng: np.random.Generator) -> CountVector:
    cells = np.searchsorted(cdf, rng.random(n), side="right")
    return CountVector(np.bincount(cells, minlength=cdf.size))


@dataclass(frozen=True)
class SimulationSpec:
    sampling_dist: np.ndarray
    null_dist: np.ndarray
    n: int = 400
    replicates: int = 1000
    alpha_levels: tuple[float, ...] = DEFAULT_ALPHAS
    seed: int = 0
    h: float = 0.1
    eps_fraction: float = 1e-3

    def __post_init__(self) -> None:
        sampling = as_prob_vector(self.sampling_dist, name="sampling_dist")
        null = as_prob_vector(self.null_dist, strictly_positive=True, name="null_dist")
        if sampling.shape != null.shape:
            raise ValueError("sampling and null distributions differ in length")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.alpha_levels or any(not 0 < a < 1 for a in self.alpha_levels):
            raise ValueError(f"alpha levels must lie in (0, 1), got {self.alpha_levels}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "sampling_dist", sampling)
        object.__setattr__(self, "null_dist", null)
        object.__setattr__(self, "alpha_levels", tuple(float(a) for a in self.alpha_levels))

    @property
    def R(self) -> int:
        return int(self.sampling_dist.size)

    @property
    def df(self) -> int:
        return self.R - 1

    def as_dict(self) -> dict:
        return {
            "sampling_dist": self.sampling_dist.tolist(),
            "null_dist": self.null_dist.tolist(),
            "n": self.n,
            "R": self.R,
            "replicates": self.replicates,
            "alpha_levels": list(self.alpha_levels),
            "seed": self.seed,
            "h": self.h,
            "eps_fraction": self.eps_fraction,
        }


@dataclass
class Bucket:
    """Replicates sharing one zero count ``c``."""

    c: int
    count: int
    quantiles: dict[str, float]
    rejection_rates: dict[float, dict[str, float]]


@dataclass
class SimulationSummary:
    spec: SimulationSpec
    thresholds: dict[float, float]
    rejection_rates: dict[float, dict[str, float]]
    buckets: list[Bucket]
    mode_c: int
    fallback_count: int
    rng_algorithm: str = RNG_ALGORITHM
    zero_counts: np.ndarray = field(default=None, repr=False)
    statistics: np.ndarray = field(default=None, repr=False)

    def bucket(self, c: int) -> Bucket:
        for b in self.buckets:
            if b.c == c:
                return b
        raise KeyError(f"no replicate had c={c}")

    @property
    def modal_rejection_rates(self) -> dict[float, dict[str, float]]:
        return self.bucket(self.mode_c).rejection_rates

    def as_dict(self) -> dict:
        def rates(r):
            return {str(a): dict(v) for a, v in r.items()}

        return {
            "spec": self.spec.as_dict(),
            "rng_algorithm": self.rng_algorithm,
            "df": self.spec.df,
            "thresholds": {str(a): t for a, t in self.thresholds.items()},
            "mode_c": self.mode_c,
            "fallback_count": self.fallback_count,
            "rejection_rates": rates(self.rejection_rates),
            "modal_rejection_rates": rates(self.modal_rejection_rates),
            "buckets": [
                {
                    "c": b.c,
                    "count": b.count,
                    "quantiles": dict(b.quantiles),
                    "rejection_rates": rates(b.rejection_rates),
                }
                for b in self.buckets
            ],
        }

    def quantiles_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["c", "bucket_count", *(f"q_{s}" for s in STATISTICS)])
        for b in self.buckets:
            w.writerow([b.c, b.count, *(repr(b.quantiles[s]) for s in STATISTICS)])
        return out.getvalue()

    def rates_csv(self) -> str:
        """Rows for all replicates (``subset=all``) then one per ``c`` bucket."""
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["subset", "c", "count", "alpha", *STATISTICS])
        for a in self.spec.alpha_levels:
            w.writerow(["all", "", self.spec.replicates, a,
                        *(repr(self.rejection_rates[a][s]) for s in STATISTICS)])
        for b in self.buckets:
            for a in self.spec.alpha_levels:
                w.writerow(["bucket", b.c, b.count, a,
                            *(repr(b.rejection_rates[a][s]) for s in STATISTICS)])
        return out.getvalue()


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _run_replicates(spec: SimulationSpec, indices: range) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    eps_policy = EpsPolicy(spec.eps_fraction)
    cdf = np.cumsum(spec.sampling_dist)
    cdf /= cdf[-1]
    k = len(indices)
    zeros = np.empty(k, dtype=np.int64)
    fallback = np.empty(k, dtype=bool)
    values = np.empty((k, len(STATISTICS)))
    for row, i in enumerate(indices):
        counts = _draw(cdf, spec.n, replicate_rng(spec.seed, i))
        params = choose_ab(counts, h=spec.h, eps_policy=eps_policy)
        stats = compute_statistics(spec.null_dist, counts, params)
        zeros[row] = counts.c
        fallback[row] = params.fallback
        values[row] = [stats[s] for s in STATISTICS]
    return zeros, fallback, values


def empirical_quantile(values: np.ndarray, level: float = QUANTILE_LEVEL) -> float:
    """Order statistic ``x_(ceil(level * k))`` (inverse of the empirical CDF)."""
    ordered = np.sort(np.asarray(values))
    k = ordered.size
    if k == 0:
        raise ValueError("no values")
    return float(ordered[max(math.ceil(level * k), 1) - 1])


def _rates(values: np.ndarray, thresholds: dict[float, float]) -> dict[float, dict[str, float]]:
    return {
        a: {s: float(np.mean(values[:, j] > t)) for j, s in enumerate(STATISTICS)}
        for a, t in thresholds.items()
    }


def run_simulation(spec: SimulationSpec, workers: int = 1) -> SimulationSummary:
    """Draw ``spec.replicates`` samples and aggregate every statistic.

    ``workers > 1`` spreads replicates over processes; the summary is
    identical for any worker count.
    """
    if workers <= 1 or spec.replicates < 2 * workers:
        zeros, fallback, values = _run_replicates(spec, range(spec.replicates))
    else:
        edges = np.linspace(0, spec.replicates, workers + 1).astype(int)
        chunks = [range(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_replicates, [spec] * len(chunks), chunks))
        zeros = np.concatenate([p[0] for p in parts])
        fallback = np.concatenate([p[1] for p in parts])
        values = np.concatenate([p[2] for p in parts])

    thresholds = {a: chi_square_quantile(1.0 - a, spec.df) for a in spec.alpha_levels}
    buckets = []
    for c in np.unique(zeros):
        sel = values[zeros == c]
        buckets.append(Bucket(
            c=int(c),
            count=int(sel.shape[0]),
            quantiles={s: empirical_quantile(sel[:, j]) for j, s in enumerate(STATISTICS)},
            rejection_rates=_rates(sel, thresholds),
        ))
    mode_c = int(np.argmax(np.bincount(zeros)))
    return SimulationSummary(
        spec=spec,
        thresholds=thresholds,
        rejection_rates=_rates(values, thresholds),
        buckets=buckets,
        mode_c=mode_c,
        fallback_count=int(fallback.sum()),
        zero_counts=zeros,
        statistics=values,
    )


@dataclass(frozen=True)
class DecayPoint:
    n: int
    replicates: int
    prob_any_zero: float

    @property
    def standard_error(self) -> float:
        p = self.prob_any_zero
        return math.sqrt(p * (1.0 - p) / self.replicates)


def zero_count_decay(
    p: Sequence[float] | np.ndarray,
    n_grid: Sequence[int],
    replicates: int = 1000,
    seed: int = 0,
) -> list[DecayPoint]:
    """Empirical ``P(at least one empty cell)`` for each sample size in ``n_grid``."""
    p = as_prob_vector(p, strictly_positive=True)
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    out = []
    for k, n in enumerate(n_grid):
        # one stream per grid point, derived from (seed, grid index)
        rng = replicate_rng(seed, k)
        draws = rng.multinomial(int(n), p, size=replicates)
        hits = int(np.count_nonzero((draws == 0).any(axis=1)))
        out.append(DecayPoint(int(n), replicates, hits / replicates))
    return out
