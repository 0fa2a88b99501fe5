"""Panel quantile regression with entity fixed effects.

Two estimation routes share one model, y_it = a_i + x'b + (g_i + x'd)u:

* a two-step location-scale moment estimator whose quantile coefficients
  are affine in the standardized-residual quantile, b(tau) = b + d*Q_u(tau);
* a Bayesian sampler at a single quantile level using the asymmetric
  check-loss working likelihood, with fixed entity intercepts.

The moment estimator is deterministic; the sampler is reproducible from
its chain configuration seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import substream
from .errors import (
    InsufficientDataError,
    RankDeficiencyError,
    ScalePositivityError,
    TuningError,
)
from .panel import PanelDataset, add_lags, format_period
from .quantile import check_loss, empirical_quantile


def _complete_rows(
    panel: PanelDataset, columns: list[str]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Listwise deletion across columns.

    Returns (entity_codes, period_codes, value matrix) with one row per
    observation that is present in every column, entity-major order.
    """
    mats = [panel.values(c) for c in columns]
    present = ~np.isnan(mats[0])
    for m in mats[1:]:
        present &= ~np.isnan(m)
    ent_idx, per_idx = np.nonzero(present)
    data = np.column_stack([m[ent_idx, per_idx] for m in mats])
    return ent_idx, per_idx, data


def _within_ols(
    y: np.ndarray, X: np.ndarray, ent: np.ndarray, n_entities: int, columns: list[str]
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-effects least squares; returns (slopes, per-entity intercepts)."""
    counts = np.bincount(ent, minlength=n_entities).astype(float)
    y_bar = np.bincount(ent, weights=y, minlength=n_entities) / counts
    yd = y - y_bar[ent]
    p = X.shape[1]
    if p == 0:
        return np.empty(0), y_bar
    x_bar = np.empty((n_entities, p))
    for j in range(p):
        x_bar[:, j] = np.bincount(ent, weights=X[:, j], minlength=n_entities) / counts
    Xd = X - x_bar[ent]
    q, r = np.linalg.qr(Xd)
    diag = np.abs(np.diag(r))
    bad = diag <= 1e-10 * max(1.0, float(np.max(np.abs(Xd), initial=0.0)))
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0])
        raise RankDeficiencyError(
            f"within-transformed design is rank deficient at {columns[j]!r}",
            column=columns[j],
        )
    beta = np.linalg.solve(r, q.T @ yd)
    alpha = y_bar - x_bar @ beta
    return beta, alpha


@dataclass
class MmqrFit:
    """Location-scale moment fit; quantile coefficients are reconstructed
    from the stored location/scale parts, so for any quantile levels the
    points (Q_u(tau), beta_k(tau)) are exactly collinear by construction.
    """

    entities: tuple[str, ...]
    regressors: tuple[str, ...]
    alpha: np.ndarray
    gamma: np.ndarray
    beta_loc: np.ndarray
    delta: np.ndarray
    u_quantiles: dict[float, float]
    scale_floor_violations: int
    n_obs: int

    def beta(self, tau: float) -> np.ndarray:
        """Slope vector at quantile level tau (must be a fitted level)."""
        return self.beta_loc + self.delta * self._q(tau)

    def entity_quantile(self, tau: float) -> np.ndarray:
        """Per-entity intercept at quantile level tau."""
        return self.alpha + self.gamma * self._q(tau)

    def _q(self, tau: float) -> float:
        try:
            return self.u_quantiles[tau]
        except KeyError:
            fitted = sorted(self.u_quantiles)
            raise ValueError(
                f"tau={tau} was not fitted; available levels: {fitted}"
            ) from None

    def to_json_record(self) -> dict:
        return {
            "method": "mmqr",
            "regressors": list(self.regressors),
            "beta_loc": self.beta_loc.tolist(),
            "delta": self.delta.tolist(),
            "u_quantiles": {f"{t:g}": q for t, q in sorted(self.u_quantiles.items())},
            "beta_by_tau": {
                f"{t:g}": self.beta(t).tolist() for t in sorted(self.u_quantiles)
            },
            "scale_floor_violations": self.scale_floor_violations,
            "n_obs": self.n_obs,
        }


def mmqr_fit(
    panel: PanelDataset,
    response: str,
    regressors: list[str],
    taus: list[float],
    scale_tolerance_share: float = 0.0,
) -> MmqrFit:
    """Two-step fixed-effects location-scale quantile estimator.

    Step 1 regresses the response on the regressors within entities;
    step 2 regresses the absolute residual on the same design, giving the
    scale parts; standardized residuals u = r / fitted-scale carry the
    quantile information. u is renormalized to mean 0 and mean absolute
    value 1 exactly, a reparametrization that leaves every beta(tau)
    unchanged. Non-positive fitted scales are a hard error by default;
    ``scale_tolerance_share`` admits a fraction of violating rows, which
    are then excluded from the standardized-residual sample.
    """
    if not taus:
        raise ValueError("taus must be non-empty")
    for t in taus:
        if not 0.0 < t < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {t}")
    if not 0.0 <= scale_tolerance_share < 1.0:
        raise ValueError("scale_tolerance_share must lie in [0, 1)")
    columns = [response] + list(regressors)
    ent, per, data = _complete_rows(panel, columns)
    p = len(regressors)
    counts = np.bincount(ent, minlength=panel.n_entities)
    thin_entities = [
        panel.entities[i] for i in range(panel.n_entities) if counts[i] < p + 3
    ]
    if thin_entities:
        raise InsufficientDataError(
            f"entities below the {p + 3}-observation floor after listwise "
            f"deletion: {', '.join(thin_entities)}"
        )
    y = data[:, 0]
    X = data[:, 1:]
    beta, alpha = _within_ols(y, X, ent, panel.n_entities, list(regressors))
    r = y - alpha[ent] - (X @ beta if p else 0.0)
    delta, gamma = _within_ols(np.abs(r), X, ent, panel.n_entities, list(regressors))
    scale = gamma[ent] + (X @ delta if p else 0.0)
    bad = scale <= 0.0
    n_bad = int(np.count_nonzero(bad))
    if n_bad > math.floor(scale_tolerance_share * len(y)):
        offenders = [
            (panel.entities[ent[i]], format_period(panel.timeline[per[i]], panel.frequency))
            for i in np.nonzero(bad)[0]
        ]
        raise ScalePositivityError(
            f"fitted scale non-positive at {n_bad} of {len(y)} observations; "
            f"first offenders: {offenders[:20]}",
            violations=offenders,
        )
    keep = ~bad
    u = r[keep] / scale[keep]
    # exact moment normalization: shifting u by its mean and rescaling by
    # its mean absolute value is absorbed into (alpha, beta, gamma, delta)
    # without changing any reconstructed quantile coefficient
    c = float(np.mean(u))
    alpha = alpha + c * gamma
    beta = beta + c * delta
    u = u - c
    k = float(np.mean(np.abs(u)))
    if k <= 0.0:
        raise ScalePositivityError("all residuals are zero; scale undefined")
    gamma = gamma * k
    delta = delta * k
    u = u / k
    quantiles = {float(t): empirical_quantile(u, float(t)) for t in taus}
    return MmqrFit(
        entities=panel.entities,
        regressors=tuple(regressors),
        alpha=alpha,
        gamma=gamma,
        beta_loc=beta,
        delta=delta,
        u_quantiles=quantiles,
        scale_floor_violations=n_bad,
        n_obs=len(y),
    )


# -- Bayesian route ------------------------------------------------------------

@dataclass(frozen=True)
class ChainConfig:
    """Sampler settings; draws retained = (iterations - burn_in) / thin."""

    iterations: int = 6000
    burn_in: int = 1000
    thin: int = 2
    proposal_scale: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.burn_in < 0 or self.iterations <= self.burn_in:
            raise ValueError("need iterations > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if (self.iterations - self.burn_in) % self.thin != 0:
            raise ValueError(
                f"(iterations - burn_in) = {self.iterations - self.burn_in} "
                f"is not divisible by thin = {self.thin}"
            )
        if not self.proposal_scale > 0.0:
            raise ValueError("proposal_scale must be positive")


_PRIOR_SD = 100.0
_ADAPT_WINDOW = 50
_TARGET_RATE = 0.3


@dataclass
class PqrMcmcFit:
    """Posterior summary of one chain at one quantile level."""

    tau: float
    coefficient_names: tuple[str, ...]
    slope_names: tuple[str, ...]
    draws: np.ndarray
    posterior_mean: np.ndarray
    posterior_sd: np.ndarray
    mean_acceptance_rate: float
    chain_config: ChainConfig
    n_obs: int

    def slope_summary(self) -> dict[str, tuple[float, float]]:
        """Map slope name -> (posterior mean, posterior sd)."""
        offset = len(self.coefficient_names) - len(self.slope_names)
        return {
            name: (float(self.posterior_mean[offset + j]), float(self.posterior_sd[offset + j]))
            for j, name in enumerate(self.slope_names)
        }

    def to_json_record(self) -> dict:
        return {
            "method": "ald_mcmc",
            "tau": self.tau,
            "coefficients": {
                name: {"mean": float(m), "sd": float(s)}
                for name, m, s in zip(
                    self.coefficient_names, self.posterior_mean, self.posterior_sd
                )
            },
            "mean_acceptance_rate": self.mean_acceptance_rate,
            "n_draws": int(self.draws.shape[0]),
            "n_obs": self.n_obs,
        }


def _design_with_lags(
    panel: PanelDataset,
    response: str,
    regressors: list[str],
    uncertainty_regressors: list[str],
    uncertainty_lags: int,
) -> tuple[PanelDataset, list[str]]:
    slopes = list(regressors)
    if uncertainty_regressors:
        if uncertainty_lags < 1:
            raise ValueError("uncertainty_lags must be >= 1 when lagged regressors are given")
        panel = add_lags(panel, uncertainty_regressors, uncertainty_lags)
        for name in uncertainty_regressors:
            slopes.extend(f"{name}_l{k}" for k in range(1, uncertainty_lags + 1))
    return panel, slopes


def pqr_mcmc_fit(
    panel: PanelDataset,
    response: str,
    regressors: list[str],
    tau: float,
    chain_config: ChainConfig | None = None,
    uncertainty_regressors: list[str] | None = None,
    uncertainty_lags: int = 3,
) -> PqrMcmcFit:
    """Bayesian quantile regression with fixed entity intercepts.

    Contemporaneous ``regressors`` enter as given; each name in
    ``uncertainty_regressors`` enters only through lags 1..uncertainty_lags,
    built within entities. The coefficient block moves by random-walk
    proposals shaped by the design Gram matrix, with step-size adaptation
    confined to burn-in; the check-loss scale has a conjugate update.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    cfg = chain_config if chain_config is not None else ChainConfig()
    panel, slopes = _design_with_lags(
        panel, response, regressors, list(uncertainty_regressors or []), uncertainty_lags
    )
    ent, _, data = _complete_rows(panel, [response] + slopes)
    if len(data) == 0:
        raise InsufficientDataError("no complete observations after lag construction")
    y = data[:, 0]
    X = data[:, 1:]
    used = np.unique(ent)
    n_ent = len(used)
    remap = {code: j for j, code in enumerate(used)}
    Z = np.zeros((len(y), n_ent + len(slopes)))
    for row, code in enumerate(ent):
        Z[row, remap[code]] = 1.0
    Z[:, n_ent:] = X
    names = tuple(f"intercept[{panel.entities[c]}]" for c in used) + tuple(slopes)
    k = Z.shape[1]
    if len(y) <= k:
        raise InsufficientDataError(f"{len(y)} observations for {k} coefficients")
    gram = Z.T @ Z
    try:
        chol = np.linalg.cholesky(np.linalg.inv(gram))
    except np.linalg.LinAlgError:
        raise RankDeficiencyError("design Gram matrix is singular", column=None) from None

    rng = substream(cfg.seed)
    theta, _, _, _ = np.linalg.lstsq(Z, y, rcond=None)
    resid = y - Z @ theta
    loss = float(np.sum(check_loss(resid, tau)))
    sigma = max(loss / len(y), 1e-8)
    a0 = b0 = 0.01
    step = cfg.proposal_scale

    def log_prior(th: np.ndarray) -> float:
        return -0.5 * float(th @ th) / _PRIOR_SD**2

    n_keep = (cfg.iterations - cfg.burn_in) // cfg.thin
    draws = np.empty((n_keep, k))
    kept = 0
    accepted_window = 0
    accepted_post = 0
    lp = -loss / sigma + log_prior(theta)
    for it in range(cfg.iterations):
        prop = theta + step * (chol @ rng.standard_normal(k))
        r_prop = y - Z @ prop
        loss_prop = float(np.sum(check_loss(r_prop, tau)))
        lp_prop = -loss_prop / sigma + log_prior(prop)
        if np.log(rng.uniform()) < lp_prop - lp:
            theta, loss, lp = prop, loss_prop, lp_prop
            accepted_window += 1
            if it >= cfg.burn_in:
                accepted_post += 1
        if it < cfg.burn_in and (it + 1) % _ADAPT_WINDOW == 0:
            rate = accepted_window / _ADAPT_WINDOW
            step *= math.exp(0.5 * (rate - _TARGET_RATE))
            accepted_window = 0
        elif (it + 1) % _ADAPT_WINDOW == 0:
            accepted_window = 0
        # conjugate scale update given the current coefficient block
        g = rng.gamma(a0 + len(y), 1.0)
        sigma = (b0 + loss) / g
        lp = -loss / sigma + log_prior(theta)
        if it >= cfg.burn_in and (it - cfg.burn_in) % cfg.thin == cfg.thin - 1:
            draws[kept] = theta
            kept += 1
    rate = accepted_post / (cfg.iterations - cfg.burn_in)
    if rate < 0.001 or rate > 0.999:
        raise TuningError(
            f"acceptance rate {rate:.4f} outside [0.001, 0.999] after adaptation; "
            f"adjust proposal_scale (final step {step:.3g})"
        )
    return PqrMcmcFit(
        tau=tau,
        coefficient_names=names,
        slope_names=tuple(slopes),
        draws=draws,
        posterior_mean=draws.mean(axis=0),
        posterior_sd=draws.std(axis=0, ddof=1),
        mean_acceptance_rate=float(rate),
        chain_config=cfg,
        n_obs=len(y),
    )


# -- reporting -----------------------------------------------------------------

@dataclass
class CoefficientTable:
    """Per-regressor coefficients across quantile levels, one (value,
    dispersion) cell pair per level; dispersion is None where the
    estimator provides no spread measure.
    """

    tau_labels: tuple[str, ...]
    regressors: tuple[str, ...]
    cells: dict[str, dict[str, tuple[float, float | None]]]

    def to_csv_text(self) -> str:
        header = ["regressor"]
        for lab in self.tau_labels:
            header += [f"q{lab}_coefficient", f"q{lab}_dispersion"]
        lines = [",".join(header)]
        for name in self.regressors:
            row = [name]
            for lab in self.tau_labels:
                coef, disp = self.cells[name][lab]
                row.append(repr(coef))
                row.append("" if disp is None else repr(disp))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json_record(self) -> dict:
        return {
            "quantiles": list(self.tau_labels),
            "rows": [
                {
                    "regressor": name,
                    "cells": {
                        lab: {
                            "coefficient": self.cells[name][lab][0],
                            "dispersion": self.cells[name][lab][1],
                        }
                        for lab in self.tau_labels
                    },
                }
                for name in self.regressors
            ],
        }


def _tau_label(tau: float) -> str:
    return f"{tau * 100:g}"


def quantile_coefficient_table(
    fit: MmqrFit | list[PqrMcmcFit],
    taus: list[float] | None = None,
) -> CoefficientTable:
    """Arrange quantile-level coefficients as a regressor-by-level table.

    For the moment estimator the levels default to its fitted set; for a
    list of sampler fits each fit contributes its own level and dispersion
    is the posterior standard deviation.
    """
    if isinstance(fit, MmqrFit):
        levels = sorted(fit.u_quantiles) if taus is None else list(taus)
        if not levels:
            raise ValueError("no quantile levels requested")
        labels = tuple(_tau_label(t) for t in levels)
        cells: dict[str, dict[str, tuple[float, float | None]]] = {}
        for j, name in enumerate(fit.regressors):
            cells[name] = {}
            for t, lab in zip(levels, labels):
                cells[name][lab] = (float(fit.beta(t)[j]), None)
        return CoefficientTable(labels, fit.regressors, cells)

    fits = list(fit)
    if not fits:
        raise ValueError("no fits supplied")
    if taus is not None:
        wanted = [float(t) for t in taus]
        have = {f.tau for f in fits}
        missing = [t for t in wanted if t not in have]
        if missing:
            raise ValueError(f"no fit at quantile level(s) {missing}")
        fits = [next(f for f in fits if f.tau == t) for t in wanted]
    else:
        fits = sorted(fits, key=lambda f: f.tau)
    if not fits:
        raise ValueError("no quantile levels requested")
    names = fits[0].slope_names
    for f in fits[1:]:
        if f.slope_names != names:
            raise ValueError("fits disagree on slope names; cannot tabulate")
    labels = tuple(_tau_label(f.tau) for f in fits)
    cells = {name: {} for name in names}
    for f, lab in zip(fits, labels):
        summary = f.slope_summary()
        for name in names:
            mean, sd = summary[name]
            cells[name][lab] = (mean, sd)
    return CoefficientTable(labels, names, cells)
