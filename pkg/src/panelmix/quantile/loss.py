"""Check loss and empirical quantiles, the primitives everything else reuses."""

from __future__ import annotations

import numpy as np


def check_loss(w, tau: float) -> np.ndarray:
    """Asymmetric absolute loss w * (tau - 1{w < 0}), elementwise.

    Positive residuals are weighted by tau, negative ones by (1 - tau);
    the loss is zero only at zero.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    w = np.asarray(w, dtype=float)
    return w * (tau - (w < 0.0))


def empirical_quantile(sample, tau: float) -> float:
    """Left-continuous empirical quantile: inf{y in sample : F_n(y) >= tau}.

    Equals the smallest order statistic whose empirical CDF reaches tau,
    which is also a minimizer of the summed check loss over the sample.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    # the 1e-9 shift guards against n*tau landing just above an integer
    # through float rounding, which would select the next order statistic
    k = int(np.ceil(x.size * tau - 1e-9))
    k = max(k, 1)
    return float(np.sort(x)[k - 1])
