"""Mixed-frequency panel econometrics toolkit.

Subpackages cover panel containers and CSV ingestion (:mod:`panelmix.panel`),
panel unit-root tests (:mod:`panelmix.stationarity`), quantile regression
(:mod:`panelmix.quantile`), panel quantile estimators
(:mod:`panelmix.panelqr`), a Bayesian VAR with intra-period stacking
(:mod:`panelmix.bvar`), Granger-causality Wald tests
(:mod:`panelmix.causality`), synthetic processes (:mod:`panelmix.simulate`),
and a batch CLI (:mod:`panelmix.cli`).
"""

__version__ = "0.1.0"

from .bvar import (
    BvarMidasPosterior,
    GibbsConfig,
    ImpulseResponseSet,
    LagSelection,
    MidasDesign,
    MinnesotaHyper,
    MinnesotaMidasPrior,
    build_midas_design,
    conditional_coefficient_mean,
    gibbs_sample,
    impulse_response,
    minnesota_midas_prior,
    select_lag_order,
)
from .causality import GrangerRow, WaldTestResult, granger_suite, granger_wald_test
from .panel import (
    CsvSchema,
    PanelDataset,
    add_lags,
    derive_financial_ratios,
    first_difference,
    load_panel_csv,
    parse_period,
    summary_statistics,
    to_quarterly,
    variance_inflation_factors,
    write_panel_csv,
)
from .panelqr import (
    ChainConfig,
    MmqrFit,
    PqrMcmcFit,
    mmqr_fit,
    pqr_mcmc_fit,
    quantile_coefficient_table,
)
from .quantile import (
    check_loss,
    empirical_quantile,
    qr_bootstrap_se,
    qr_fit,
    qr_fit_bruteforce,
    solver_backend,
)
from .simulate import DgpSpec, generate
from .stationarity import (
    UnitRootResult,
    adf_test,
    llc_test,
    pp_test,
    simulate_critical_values,
)

__all__ = [
    "__version__",
    "BvarMidasPosterior",
    "ChainConfig",
    "CsvSchema",
    "DgpSpec",
    "GibbsConfig",
    "GrangerRow",
    "ImpulseResponseSet",
    "LagSelection",
    "MidasDesign",
    "MinnesotaHyper",
    "MinnesotaMidasPrior",
    "MmqrFit",
    "PanelDataset",
    "PqrMcmcFit",
    "UnitRootResult",
    "WaldTestResult",
    "add_lags",
    "adf_test",
    "build_midas_design",
    "check_loss",
    "conditional_coefficient_mean",
    "derive_financial_ratios",
    "empirical_quantile",
    "first_difference",
    "generate",
    "gibbs_sample",
    "granger_suite",
    "granger_wald_test",
    "impulse_response",
    "llc_test",
    "load_panel_csv",
    "minnesota_midas_prior",
    "mmqr_fit",
    "parse_period",
    "pp_test",
    "pqr_mcmc_fit",
    "qr_bootstrap_se",
    "qr_fit",
    "qr_fit_bruteforce",
    "quantile_coefficient_table",
    "select_lag_order",
    "simulate_critical_values",
    "solver_backend",
    "summary_statistics",
    "to_quarterly",
    "variance_inflation_factors",
    "write_panel_csv",
]
