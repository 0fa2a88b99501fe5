"""Shrinkage prior for the stacked coefficient vector.

Coefficient variances follow the classic own/cross/lag-decay recipe,
extended for the stacked layout: any slot column of a series counts as
"own" for any other slot of the same series, high- and low-frequency
series carry separate own-lag tightness, and earlier intra-period slots
of a regressor are tightened exponentially relative to the latest slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError
from .design import MidasDesign


@dataclass(frozen=True)
class MinnesotaHyper:
    """Tightness settings; all strictly positive.

    own_mean is the prior mean for own first-lag coefficients: 0 suits
    differenced/stationary inputs (the pipeline default), 1 encodes a
    random-walk prior for levels work.
    """

    lambda_own_hf: float = 0.2
    lambda_own_lf: float = 0.2
    lambda_cross: float = 0.5
    lambda_decay: float = 1.0
    lambda_slot: float = 0.5
    lambda_intercept: float = 100.0
    own_mean: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "lambda_own_hf",
            "lambda_own_lf",
            "lambda_cross",
            "lambda_decay",
            "lambda_slot",
            "lambda_intercept",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class MinnesotaMidasPrior:
    """Gaussian prior on the stacked coefficients plus an inverse-Wishart
    prior on the innovation covariance. The coefficient vector stacks
    equations: all X-columns of equation 1, then equation 2, and so on.
    """

    mean: np.ndarray
    variance: np.ndarray
    sigma_scale: np.ndarray
    sigma_dof: float
    hyper: MinnesotaHyper

    def precision_diagonal(self) -> np.ndarray:
        return 1.0 / self.variance


def _series_of_column(design: MidasDesign, col: int) -> tuple[int, int]:
    """(series id, slot) for a design column; slot m for low-frequency."""
    hf_span = design.m * design.k_h
    if col < hf_span:
        return col // design.m, col % design.m + 1
    return design.k_h + (col - hf_span), design.m


def _ar1_residual_variances(design: MidasDesign) -> np.ndarray:
    """Per-column residual variance of an intercept AR(1) fit, pooled over
    within-entity consecutive row pairs; falls back to the column variance
    when fewer than three pairs exist.
    """
    same_entity = design.row_entities[1:] == design.row_entities[:-1]
    consecutive = design.row_periods[1:] == design.row_periods[:-1] + 1
    pair = same_entity & consecutive
    out = np.empty(design.K)
    for c in range(design.K):
        y = design.Y[1:, c][pair]
        x = design.Y[:-1, c][pair]
        if len(y) < 3:
            v = float(np.var(design.Y[:, c], ddof=1)) if design.n_rows > 1 else 1.0
            out[c] = max(v, 1e-12)
            continue
        X = np.column_stack([np.ones(len(x)), x])
        b, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
        r = y - X @ b
        dof = max(len(y) - 2, 1)
        out[c] = max(float(r @ r) / dof, 1e-12)
    return out


def minnesota_midas_prior(
    design: MidasDesign, hyper: MinnesotaHyper | None = None
) -> MinnesotaMidasPrior:
    """Build the shrinkage prior for a stacked design.

    Variance of the coefficient on lag ``lag`` of regressor column r in
    equation e: (lambda_own / lag^lambda_decay)^2, times an intra-period
    slot factor exp(-2*lambda_slot*(m - slot_r)) for high-frequency
    regressors, times lambda_cross^2 * sigma_e^2 / sigma_r^2 when the
    regressor belongs to a different underlying series. Intercepts get
    (lambda_intercept * sigma_e)^2. The covariance prior is inverse-
    Wishart with scale diag(sigma^2) and K + 2 degrees of freedom.
    """
    hyper = hyper if hyper is not None else MinnesotaHyper()
    K = design.K
    q = design.X.shape[1]
    sig2 = _ar1_residual_variances(design)
    hf_span = design.m * design.k_h
    mean = np.zeros(q * K)
    var = np.empty(q * K)
    for e in range(K):
        eq_series, _ = _series_of_column(design, e)
        base = e * q
        var[base] = (hyper.lambda_intercept * np.sqrt(sig2[e])) ** 2
        for lag in range(1, design.p + 1):
            for r in range(K):
                reg_series, reg_slot = _series_of_column(design, r)
                own_lambda = (
                    hyper.lambda_own_hf if r < hf_span else hyper.lambda_own_lf
                )
                v = (own_lambda / lag**hyper.lambda_decay) ** 2
                if r < hf_span:
                    v *= np.exp(-2.0 * hyper.lambda_slot * (design.m - reg_slot))
                if reg_series != eq_series:
                    v *= hyper.lambda_cross**2 * sig2[e] / sig2[r]
                idx = base + 1 + (lag - 1) * K + r
                var[idx] = v
                if lag == 1 and r == e:
                    mean[idx] = hyper.own_mean
    if not np.all(var > 0.0):
        raise DegenerateInputError("prior variance vector has non-positive entries")
    return MinnesotaMidasPrior(
        mean=mean,
        variance=var,
        sigma_scale=np.diag(sig2),
        sigma_dof=float(K + 2),
        hyper=hyper,
    )
