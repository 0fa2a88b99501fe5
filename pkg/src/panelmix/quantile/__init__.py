from .loss import check_loss, empirical_quantile
from .solver import QuantileFit, qr_fit, solver_backend
from .bruteforce import qr_fit_bruteforce
from .bootstrap import BootstrapResult, qr_bootstrap_se

__all__ = [
    "check_loss",
    "empirical_quantile",
    "QuantileFit",
    "qr_fit",
    "solver_backend",
    "qr_fit_bruteforce",
    "BootstrapResult",
    "qr_bootstrap_se",
]
