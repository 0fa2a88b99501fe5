"""Orthogonalized impulse responses from posterior draws.

Per draw, companion powers give the moving-average weights and the
lower-triangular factor of the (degrees-of-freedom adjusted) covariance
draw orthogonalizes them. Bands are pointwise posterior quantiles. A
shock ordering other than the design's column order is applied by
permuting before factorization and mapping the responses back, so output
labels always follow the design columns.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError
from .gibbs import BvarMidasPosterior


@dataclass
class ImpulseResponseSet:
    """Pointwise posterior summary of responses; entry [h, i, j] is the
    response of variable i to a one-standard-deviation shock in j at
    horizon h. Variable labels follow the design columns regardless of
    the Cholesky ordering used.
    """

    horizons: int
    columns: tuple[str, ...]
    ordering: tuple[str, ...]
    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    explosive_share: float
    warning: str | None

    def to_csv_text(self) -> str:
        lines = ["shock,response,horizon,median,lo,hi"]
        for j, shock in enumerate(self.columns):
            for i, resp in enumerate(self.columns):
                for h in range(self.horizons + 1):
                    lines.append(
                        f"{shock},{resp},{h},{float(self.median[h, i, j])!r},"
                        f"{float(self.lower[h, i, j])!r},{float(self.upper[h, i, j])!r}"
                    )
        return "\n".join(lines) + "\n"


def _psi_weights(a_mats: np.ndarray, horizons: int) -> np.ndarray:
    """Moving-average matrices Psi_0..Psi_H from lag matrices (p, K, K)."""
    p, K, _ = a_mats.shape
    psi = np.empty((horizons + 1, K, K))
    psi[0] = np.eye(K)
    for h in range(1, horizons + 1):
        acc = np.zeros((K, K))
        for j in range(1, min(h, p) + 1):
            acc += a_mats[j - 1] @ psi[h - j]
        psi[h] = acc
    return psi


def _companion_radius(a_mats: np.ndarray) -> float:
    p, K, _ = a_mats.shape
    F = np.zeros((K * p, K * p))
    F[:K] = np.concatenate(list(a_mats), axis=1)
    if p > 1:
        F[K:, : K * (p - 1)] = np.eye(K * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(F))))


def impulse_response(
    posterior: BvarMidasPosterior,
    horizons: int,
    ordering: list[str] | None = None,
) -> ImpulseResponseSet:
    """Median and 5%/95% bands of orthogonalized responses per draw.

    ``ordering`` lists the design columns in the desired recursive order
    (default: design column order). Covariance draws carry the
    T/(T - K*p - 1) degrees-of-freedom adjustment before factorization.
    Explosive companion dynamics in more than half the draws attach a
    warning instead of failing.
    """
    if horizons < 0:
        raise ValueError("horizons must be >= 0")
    design = posterior.design
    K, p = design.K, design.p
    T = design.n_rows
    dof = T - K * p - 1
    if dof <= 0:
        raise DegenerateInputError(
            f"{T} rows leave no degrees of freedom for {K * p + 1} "
            "coefficients per equation"
        )
    adjust = T / dof
    if ordering is None:
        perm = np.arange(K)
    else:
        if sorted(ordering) != sorted(design.columns):
            raise ValueError(
                "ordering must be a permutation of the design columns "
                f"{list(design.columns)}"
            )
        perm = np.array([design.columns.index(c) for c in ordering])
    n_draws = posterior.beta_draws.shape[0]
    out = np.empty((n_draws, horizons + 1, K, K))
    explosive = 0
    for d in range(n_draws):
        B = posterior.beta_matrix(d)
        a_mats = np.stack(
            [B[1 + lag * K : 1 + (lag + 1) * K].T for lag in range(p)]
        )
        if _companion_radius(a_mats) >= 1.0:
            explosive += 1
        psi = _psi_weights(a_mats, horizons)
        sigma = posterior.sigma_draws[d] * adjust
        sigma_perm = sigma[np.ix_(perm, perm)]
        try:
            chol = np.linalg.cholesky(sigma_perm)
        except np.linalg.LinAlgError:
            chol = np.linalg.cholesky(
                sigma_perm + 1e-12 * float(np.mean(np.diag(sigma_perm))) * np.eye(K)
            )
        theta_perm = psi[:, perm][:, :, perm] @ chol
        theta = np.empty_like(theta_perm)
        theta[:, perm[:, None], perm[None, :]] = theta_perm
        out[d] = theta
    share = explosive / n_draws
    warning = None
    if share > 0.5:
        warning = (
            f"companion spectral radius >= 1 in {share:.0%} of draws; "
            "responses may not die out"
        )
        warnings.warn(warning, stacklevel=2)
    median = np.median(out, axis=0)
    lower = np.percentile(out, 5, axis=0)
    upper = np.percentile(out, 95, axis=0)
    order_names = tuple(design.columns[i] for i in perm)
    return ImpulseResponseSet(
        horizons=horizons,
        columns=design.columns,
        ordering=order_names,
        median=median,
        lower=lower,
        upper=upper,
        explosive_share=float(share),
        warning=warning,
    )
