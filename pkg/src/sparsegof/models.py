"""Null models, their fitted probabilities, and the full test report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core_stats import (
    StructuralZeroError,
    _g,
    _q,
    _rc,
    as_prob_vector,
    chi_square_quantile,
    chi_square_sf,
)
from .corrections import (
    DEFAULT_H,
    CorrectionParams,
    CountVector,
    EpsPolicy,
    _corrected_g,
    _corrected_q,
    as_counts,
    choose_ab,
)
from .tables import ContingencyTable, flatten

#: Statistic keys, in report order.
STATISTICS = ("Q", "Qab", "G", "Gab", "RC23", "GKu")


@dataclass(frozen=True)
class SimpleNull:
    """Fully specified null probabilities; no parameters are estimated."""

    p0: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p0", as_prob_vector(self.p0, strictly_positive=True, name="p0"))

    name = "simple"

    @property
    def s(self) -> int:
        return 0

    @property
    def R(self) -> int:
        return int(self.p0.size)

    @property
    def df(self) -> int:
        return self.R - self.s - 1


@dataclass(frozen=True)
class Independence2D:
    """Independence of rows and columns in an ``rows x cols`` table."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"independence needs at least a 2x2 table, got {self.rows}x{self.cols}")

    name = "independence"

    @property
    def s(self) -> int:
        return (self.rows - 1) + (self.cols - 1)

    @property
    def R(self) -> int:
        return self.rows * self.cols

    @property
    def df(self) -> int:
        return self.R - self.s - 1


NullModel = Union[SimpleNull, Independence2D]


@dataclass(frozen=True)
class FittedNull:
    p_star0: np.ndarray
    df: int


def fit_null(model: NullModel, data: CountVector | ContingencyTable | np.ndarray) -> FittedNull:
    """Estimate the null probabilities by maximum likelihood.

    For independence the estimate is the outer product of the empirical
    row and column marginals, flattened row-major.  Empty rows or columns
    must be removed beforehand (see :func:`sparsegof.tables.remove_empty_margins`).
    """
    if isinstance(model, SimpleNull):
        cv = as_counts(data.cells.ravel() if isinstance(data, ContingencyTable) else data)
        if cv.R != model.R:
            raise ValueError(f"dimension mismatch: null has {model.R} cells, counts have {cv.R}")
        return FittedNull(model.p0, model.df)

    if isinstance(data, ContingencyTable):
        cells = data.cells
    else:
        cells = np.asarray(data.counts if isinstance(data, CountVector) else data)
        cells = cells.reshape(model.rows, model.cols)
    if cells.shape != (model.rows, model.cols):
        raise ValueError(f"table shape {cells.shape} does not match model {model.rows}x{model.cols}")
    n = cells.sum()
    row = cells.sum(axis=1)
    col = cells.sum(axis=0)
    if np.any(row == 0) or np.any(col == 0):
        raise StructuralZeroError(
            "table has empty rows or columns; remove them before fitting independence"
        )
    p_star0 = np.outer(row / n, col / n).ravel()
    p_star0.flags.writeable = False
    return FittedNull(p_star0, model.df)


@dataclass(frozen=True)
class CorrectionConfig:
    h: float = DEFAULT_H
    eps_policy: EpsPolicy = field(default_factory=EpsPolicy)


@dataclass
class TestReport:
    """Every statistic, the chi-square threshold, and the decisions they imply."""

    __test__ = False  # keep pytest from collecting this class

    model: str
    n: int
    R: int
    c: int
    df: int
    alpha: float
    threshold: float
    statistics: dict[str, float]
    p_values: dict[str, float]
    decisions: dict[str, bool]
    combined_reject: bool
    params: CorrectionParams
    eps_fraction: float
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "R": self.R,
            "c": self.c,
            "df": self.df,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "statistics": dict(self.statistics),
            "p_values": dict(self.p_values),
            "reject": dict(self.decisions),
            "combined_reject": self.combined_reject,
            "correction": {**self.params.as_dict(), "eps_fraction": self.eps_fraction},
            "warnings": list(self.warnings),
        }


def _counts_of(data, model: NullModel) -> CountVector:
    if isinstance(data, ContingencyTable):
        return flatten(data)
    arr = data.counts if isinstance(data, CountVector) else np.asarray(data)
    return as_counts(np.ravel(arr))


def compute_statistics(null: np.ndarray, counts: CountVector, params: CorrectionParams) -> dict[str, float]:
    """The six statistics for one count vector against a fitted null."""
    null = as_prob_vector(null, strictly_positive=True, name="null")
    if null.size != counts.R:
        raise ValueError(f"dimension mismatch: null has {null.size} cells, counts have {counts.R}")
    mle = counts.mle()
    n = counts.n
    g = _g(null, mle, n)
    return {
        "Q": _q(null, mle, n),
        "Qab": _corrected_q(null, counts, params),
        "G": g,
        "Gab": _corrected_g(null, counts, params),
        "RC23": _rc(2.0 / 3.0, null, mle, n),
        "GKu": g - counts.c,
    }


def run_test(
    data: CountVector | ContingencyTable | np.ndarray,
    model: NullModel,
    alpha: float = 0.05,
    config: CorrectionConfig | None = None,
) -> TestReport:
    """Goodness-of-fit test of ``data`` against ``model``.

    The combined decision rejects when either corrected statistic exceeds
    the chi-square quantile of order ``1 - alpha``; individual decisions for
    all six statistics are reported alongside.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    config = config or CorrectionConfig()
    counts = _counts_of(data, model)
    fitted = fit_null(model, data if isinstance(data, ContingencyTable) else counts)
    params = choose_ab(counts, h=config.h, eps_policy=config.eps_policy)
    stats = compute_statistics(fitted.p_star0, counts, params)

    threshold = chi_square_quantile(1.0 - alpha, fitted.df)
    decisions = {k: bool(v > threshold) for k, v in stats.items()}
    p_values = {k: chi_square_sf(max(v, 0.0), fitted.df) for k, v in stats.items()}
    warnings = []
    if params.fallback and params.reason:
        warnings.append(f"correction not applied: {params.reason}")
    bad = [k for k, v in stats.items() if not math.isfinite(v)]
    if bad:
        warnings.append(f"non-finite statistics: {bad}")

    return TestReport(
        model=model.name,
        n=counts.n,
        R=counts.R,
        c=counts.c,
        df=fitted.df,
        alpha=alpha,
        threshold=threshold,
        statistics=stats,
        p_values=p_values,
        decisions=decisions,
        combined_reject=decisions["Qab"] or decisions["Gab"],
        params=params,
        eps_fraction=config.eps_policy.fraction,
        warnings=warnings,
    )
