"""Gibbs sampler for the stacked system's conjugate conditionals.

Coefficients given covariance are Gaussian; covariance given
coefficients is inverse-Wishart on the prior scale plus the residual
cross-product. A flat coefficient prior (prior=None) collapses the
coefficient conditional onto least squares, which the tests exploit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import stats as sstats

from .._rng import substream
from ..errors import ConvergenceError
from .design import MidasDesign
from .prior import MinnesotaMidasPrior


@dataclass(frozen=True)
class GibbsConfig:
    """Chain settings; retained draws = (draws - burn_in) / thin."""

    draws: int = 5000
    burn_in: int = 1000
    thin: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.burn_in < 0 or self.draws <= self.burn_in:
            raise ValueError("need draws > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if (self.draws - self.burn_in) % self.thin != 0:
            raise ValueError(
                f"(draws - burn_in) = {self.draws - self.burn_in} "
                f"is not divisible by thin = {self.thin}"
            )

    @property
    def n_retained(self) -> int:
        return (self.draws - self.burn_in) // self.thin


@dataclass
class BvarMidasPosterior:
    """Retained draws for the stacked system.

    beta_draws rows stack equations (all X-columns of equation 1 first);
    sigma_draws holds the corresponding innovation covariance draws.
    """

    beta_draws: np.ndarray
    sigma_draws: np.ndarray
    config: GibbsConfig
    design: MidasDesign
    coefficient_names: tuple[str, ...]

    def beta_matrix(self, draw: int) -> np.ndarray:
        """Coefficient matrix B (X-columns by K equations) for one draw."""
        q = self.design.X.shape[1]
        return self.beta_draws[draw].reshape(self.design.K, q).T

    def posterior_summary(self) -> list[dict]:
        mean = self.beta_draws.mean(axis=0)
        sd = self.beta_draws.std(axis=0, ddof=1)
        lo, hi = np.percentile(self.beta_draws, [5, 95], axis=0)
        return [
            {
                "coefficient": name,
                "mean": float(mean[i]),
                "sd": float(sd[i]),
                "q5": float(lo[i]),
                "q95": float(hi[i]),
            }
            for i, name in enumerate(self.coefficient_names)
        ]


def _coefficient_names(design: MidasDesign) -> tuple[str, ...]:
    labels = design.lag_column_labels()
    return tuple(
        f"{eq} <- {lab}" for eq in design.columns for lab in labels
    )


def _chol_with_jitter(P: np.ndarray, what: str, iteration: int) -> np.ndarray:
    try:
        return np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * float(np.mean(np.diag(P))) + 1e-300
        try:
            return np.linalg.cholesky(P + jitter * np.eye(P.shape[0]))
        except np.linalg.LinAlgError:
            raise ConvergenceError(
                f"{what} Cholesky failed after jitter at iteration {iteration}"
            ) from None


def conditional_coefficient_mean(
    design: MidasDesign,
    prior: MinnesotaMidasPrior | None,
    sigma: np.ndarray,
) -> np.ndarray:
    """Exact mean of the coefficient conditional at a given covariance.

    With a flat prior this is the stacked least-squares solution, which
    the identity tests verify directly.
    """
    K = design.K
    q = design.X.shape[1]
    if prior is None:
        prior_prec = np.zeros(q * K)
        rhs_prior = np.zeros(q * K)
    else:
        prior_prec = prior.precision_diagonal()
        rhs_prior = prior_prec * prior.mean
    sig_chol = _chol_with_jitter(np.asarray(sigma, dtype=float), "covariance", -1)
    sig_inv = sla.cho_solve((sig_chol, True), np.eye(K))
    P = np.kron(sig_inv, design.X.T @ design.X)
    P[np.diag_indices_from(P)] += prior_prec
    rhs = rhs_prior + (design.X.T @ design.Y @ sig_inv).T.ravel()
    L = _chol_with_jitter(P, "coefficient precision", -1)
    return sla.cho_solve((L, True), rhs)


def gibbs_sample(
    design: MidasDesign,
    prior: MinnesotaMidasPrior | None,
    config: GibbsConfig | None = None,
    fixed_sigma: np.ndarray | None = None,
) -> BvarMidasPosterior:
    """Draw from the posterior of the stacked system.

    ``prior=None`` uses a flat coefficient prior with a noninformative
    covariance prior (scale 0, K+2 degrees of freedom). ``fixed_sigma``
    pins the innovation covariance, skipping its update. Deterministic
    given the config seed.
    """
    cfg = config if config is not None else GibbsConfig()
    Y, X = design.Y, design.X
    T, K = Y.shape
    q = X.shape[1]
    if T - design.p <= design.K * design.p + 1:
        warnings.warn(
            f"{T} stacked rows for {design.K * design.p + 1} coefficients per "
            "equation; the prior dominates",
            stacklevel=2,
        )
    if prior is None:
        prior_prec = np.zeros(q * K)
        prior_mean = np.zeros(q * K)
        q_scale = np.zeros((K, K))
        omega = float(K + 2)
    else:
        prior_prec = prior.precision_diagonal()
        prior_mean = prior.mean
        q_scale = prior.sigma_scale
        omega = prior.sigma_dof

    XtX = X.T @ X
    XtY = X.T @ Y
    rng = substream(cfg.seed)

    b0, _, _, _ = np.linalg.lstsq(X, Y, rcond=None)
    resid0 = Y - X @ b0
    dof0 = max(T - q, 1)
    sigma = resid0.T @ resid0 / dof0
    if fixed_sigma is not None:
        sigma = np.asarray(fixed_sigma, dtype=float)
        if sigma.shape != (K, K):
            raise ValueError(f"fixed_sigma must be {K}x{K}")
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        sigma = sigma + 1e-6 * np.eye(K)

    n_keep = cfg.n_retained
    beta_draws = np.empty((n_keep, q * K))
    sigma_draws = np.empty((n_keep, K, K))
    kept = 0
    rhs_prior = prior_prec * prior_mean
    for it in range(cfg.draws):
        sig_chol = _chol_with_jitter(sigma, "covariance", it)
        sig_inv = sla.cho_solve((sig_chol, True), np.eye(K))
        P = np.kron(sig_inv, XtX)
        P[np.diag_indices_from(P)] += prior_prec
        rhs = rhs_prior + (XtY @ sig_inv).T.ravel()
        L = _chol_with_jitter(P, "coefficient precision", it)
        mean_vec = sla.cho_solve((L, True), rhs)
        z = rng.standard_normal(q * K)
        beta = mean_vec + sla.solve_triangular(L, z, lower=True, trans="T")
        if not np.all(np.isfinite(beta)):
            raise ConvergenceError(f"non-finite coefficient draw at iteration {it}")
        if fixed_sigma is None:
            B = beta.reshape(K, q).T
            E = Y - X @ B
            scale = q_scale + E.T @ E
            sigma = sstats.invwishart.rvs(df=omega + T, scale=scale, random_state=rng)
            sigma = np.asarray(sigma).reshape(K, K)
            if not np.all(np.isfinite(sigma)):
                raise ConvergenceError(f"non-finite covariance draw at iteration {it}")
        if it >= cfg.burn_in and (it - cfg.burn_in) % cfg.thin == cfg.thin - 1:
            beta_draws[kept] = beta
            sigma_draws[kept] = sigma
            kept += 1
    return BvarMidasPosterior(
        beta_draws=beta_draws,
        sigma_draws=sigma_draws,
        config=cfg,
        design=design,
        coefficient_names=_coefficient_names(design),
    )
