from .design import MidasDesign, build_midas_design
from .gibbs import (
    BvarMidasPosterior,
    GibbsConfig,
    conditional_coefficient_mean,
    gibbs_sample,
)
from .irf import ImpulseResponseSet, impulse_response
from .lagselect import LagSelection, select_lag_order
from .prior import MinnesotaHyper, MinnesotaMidasPrior, minnesota_midas_prior

__all__ = [
    "MidasDesign",
    "build_midas_design",
    "MinnesotaHyper",
    "MinnesotaMidasPrior",
    "minnesota_midas_prior",
    "GibbsConfig",
    "BvarMidasPosterior",
    "conditional_coefficient_mean",
    "gibbs_sample",
    "LagSelection",
    "select_lag_order",
    "ImpulseResponseSet",
    "impulse_response",
]
