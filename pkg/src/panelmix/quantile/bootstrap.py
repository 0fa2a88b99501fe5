"""Pair bootstrap standard errors for quantile-regression coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._rng import substream
from ..errors import RankDeficiencyError, UnstableResamplingError
from .solver import qr_fit

_MAX_ATTEMPTS = 100


@dataclass
class BootstrapResult:
    se: np.ndarray
    draws: np.ndarray  # (reps, p) coefficient draws
    reps: int
    redraws: int


def qr_bootstrap_se(X, y, tau: float, reps: int = 200, seed: int = 0) -> BootstrapResult:
    """Resample (x_i, y_i) pairs with replacement and refit.

    Replication b draws its indices from substream (seed; b, attempt);
    rank-deficient resamples are redrawn on the next attempt stream and
    counted. More redraws than reps/2 aborts as unstable.
    """
    if reps < 200:
        raise ValueError(f"reps must be >= 200 for stable standard errors, got {reps}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    draws = np.empty((reps, p))
    redraws = 0
    for b in range(reps):
        fit = None
        for attempt in range(_MAX_ATTEMPTS):
            idx = substream(seed, b, attempt).integers(0, n, size=n)
            try:
                fit = qr_fit(X[idx], y[idx], tau)
                break
            except RankDeficiencyError:
                redraws += 1
                if redraws > reps // 2:
                    raise UnstableResamplingError(
                        f"{redraws} rank-deficient resamples in {b + 1} replications"
                    ) from None
        if fit is None:
            raise UnstableResamplingError(
                f"replication {b} stayed rank-deficient after {_MAX_ATTEMPTS} attempts"
            )
        draws[b] = fit.beta
    return BootstrapResult(
        se=np.std(draws, axis=0, ddof=1), draws=draws, reps=reps, redraws=redraws
    )
