"""Goodness-of-fit and independence tests for sparse multinomial data."""

from .core_stats import (
    StructuralZeroError,
    chi_square_cdf,
    chi_square_quantile,
    chi_square_sf,
    ku_corrected_g,
    kullback_g,
    pearson_q,
    power_divergence,
)
from .corrections import (
    CorrectionParams,
    CountVector,
    EpsPolicy,
    a_bounds,
    b_bounds,
    choose_ab,
    cond2_check,
    corrected_estimator,
    corrected_g,
    corrected_q,
    likelihood_inequality_oracle,
    sparsity_stats,
)
from .models import CorrectionConfig, Independence2D, SimpleNull, TestReport, fit_null, run_test
from .montecarlo import (
    SimulationSpec,
    SimulationSummary,
    builtin_distribution,
    perturb_distribution,
    run_simulation,
    sample_multinomial,
    zero_count_decay,
)
from .tables import ContingencyTable, flatten, load_builtin, parse_table, remove_empty_margins

__version__ = "0.1.0"
