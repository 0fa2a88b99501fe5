"""Unit-root tests: single-series regression tests with an embedded
lower-tail critical-value table, a kernel-corrected variant, and the
bias-adjusted pooled panel test. All tests are intercept-only (no trend),
null of a unit root, one-sided lower tail.

The embedded constant tables are validated by
:func:`simulate_critical_values`, which regenerates the null distribution
by Monte Carlo on driftless random walks; the test suite gates the tables
against those simulations rather than trusting transcription.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import substream
from .errors import DegenerateInputError, InsufficientDataError
from .panel import PanelDataset

# lower-tail critical values for the intercept-case unit-root t statistic,
# by regression sample size, interpolated linearly in 1/n (0 = asymptotic)
_DF_ROWS = np.array([25.0, 50.0, 100.0, 250.0, 500.0, np.inf])
_DF_TABLE = {
    "1%": np.array([-3.75, -3.58, -3.51, -3.46, -3.44, -3.43]),
    "5%": np.array([-3.00, -2.93, -2.89, -2.88, -2.87, -2.86]),
    "10%": np.array([-2.63, -2.60, -2.58, -2.57, -2.57, -2.57]),
}

# pooled-test mean/std adjustment constants (intercept case), by average
# effective sample size, interpolated linearly in 1/T (0 = asymptotic)
_ADJ_ROWS = np.array(
    [25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 250.0, np.inf]
)
_ADJ_MU = np.array(
    [-0.554, -0.546, -0.541, -0.537, -0.533, -0.531, -0.527, -0.524, -0.521,
     -0.520, -0.518, -0.509, -0.500]
)
_ADJ_SIG = np.array(
    [0.919, 0.889, 0.867, 0.850, 0.837, 0.826, 0.810, 0.798, 0.789,
     0.782, 0.776, 0.742, 0.707]
)

_NORMAL_CVS = {
    "1%": -2.3263478740408408,
    "5%": -1.6448536269514722,
    "10%": -1.2815515655446004,
}


def _interp_inverse(x: float, rows: np.ndarray, values: np.ndarray) -> float:
    """Interpolate linearly in 1/x; clamps outside the tabulated range."""
    grid = 1.0 / rows  # descending in row order, 0 at infinity
    return float(np.interp(1.0 / x, grid[::-1], values[::-1]))


def df_critical_values(n_obs: int) -> dict[str, float]:
    """Intercept-case critical values at regression sample size n_obs."""
    return {k: _interp_inverse(n_obs, _DF_ROWS, v) for k, v in _DF_TABLE.items()}


def _bracket(statistic: float, cvs: dict[str, float]) -> str:
    if statistic < cvs["1%"]:
        return "reject_1pct"
    if statistic < cvs["5%"]:
        return "reject_5pct"
    return "no_reject"


@dataclass
class UnitRootResult:
    """Outcome of one unit-root test (null: unit root present)."""

    test: str
    statistic: float
    lags_or_bandwidth: int
    n_obs: int
    critical_values: dict[str, float]
    p_value_bracket: str
    deterministic_terms: str = "intercept"
    excluded_entities: tuple[str, ...] = ()
    entity_samples: dict[str, int] = field(default_factory=dict)

    @property
    def marker(self) -> str:
        """Significance marker: 'a' at 1%, 'b' at 5%, '' otherwise."""
        return {"reject_1pct": "a", "reject_5pct": "b"}.get(self.p_value_bracket, "")

    def to_json_record(self) -> dict:
        rec = {
            "test": self.test,
            "statistic": self.statistic,
            "lags_or_bandwidth": self.lags_or_bandwidth,
            "n_obs": self.n_obs,
            "critical_values": self.critical_values,
            "p_value_bracket": self.p_value_bracket,
            "marker": self.marker,
            "deterministic_terms": self.deterministic_terms,
        }
        if self.excluded_entities:
            rec["excluded_entities"] = list(self.excluded_entities)
        return rec


def _validate_series(y: np.ndarray, min_len: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if np.any(np.isnan(y)):
        raise ValueError("series contains missing values; pass a complete stretch")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if y.size < min_len:
        raise InsufficientDataError(f"series length {y.size} below minimum {min_len}")
    if np.ptp(y) == 0.0:
        raise DegenerateInputError("constant series; unit-root regression undefined")
    return y


def _ols(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least squares with classical standard errors; returns (b, se, resid)."""
    b, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ b
    dof = X.shape[0] - X.shape[1]
    if dof <= 0:
        raise InsufficientDataError("no residual degrees of freedom")
    s2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(s2 * np.diag(xtx_inv), 0.0, None))
    return b, se, resid


def adf_test(series, lags: int = 1) -> UnitRootResult:
    """Augmented test: difference regressed on intercept, lagged level,
    and ``lags`` lagged differences; statistic is the t-ratio on the level.
    """
    if lags < 0:
        raise ValueError("lags must be >= 0")
    y = _validate_series(series, lags + 10)
    dy = np.diff(y)
    rows = len(dy) - lags
    cols = [np.ones(rows), y[lags:-1]]
    for j in range(1, lags + 1):
        cols.append(dy[lags - j : len(dy) - j])
    X = np.column_stack(cols)
    b, se, _ = _ols(dy[lags:], X)
    if se[1] == 0.0:
        raise DegenerateInputError("degenerate regression: zero variance in lagged level")
    stat = float(b[1] / se[1])
    cvs = df_critical_values(rows)
    return UnitRootResult(
        test="adf",
        statistic=stat,
        lags_or_bandwidth=lags,
        n_obs=rows,
        critical_values=cvs,
        p_value_bracket=_bracket(stat, cvs),
    )


def default_bandwidth(n_obs: int) -> int:
    """Kernel truncation rule floor(4 * (n/100)^(2/9))."""
    return int(np.floor(4.0 * (n_obs / 100.0) ** (2.0 / 9.0)))


def pp_test(series, bandwidth: int | str = "auto") -> UnitRootResult:
    """Kernel-corrected unit-root test on the levels regression.

    Uses the Bartlett-weighted long-run variance of the regression
    residuals; at bandwidth 0 the statistic reduces exactly to the
    unaugmented t-ratio.
    """
    y = _validate_series(series, 20)
    n = len(y) - 1
    if bandwidth == "auto":
        bw = default_bandwidth(n)
    else:
        bw = int(bandwidth)
        if bw < 0:
            raise ValueError("bandwidth must be >= 0")
    X = np.column_stack([np.ones(n), y[:-1]])
    b, se, u = _ols(y[1:], X)
    if se[1] == 0.0:
        raise DegenerateInputError("degenerate regression: zero variance in lagged level")
    t_rho = float((b[1] - 1.0) / se[1])
    s2 = float(u @ u) / (n - 2)
    gamma0 = float(u @ u) / n
    lam2 = gamma0
    for j in range(1, bw + 1):
        w = 1.0 - j / (bw + 1.0)
        lam2 += 2.0 * w * float(u[j:] @ u[:-j]) / n
    if lam2 <= 0.0:
        raise DegenerateInputError("long-run variance estimate not positive")
    lam = np.sqrt(lam2)
    stat = float(
        np.sqrt(gamma0 / lam2) * t_rho
        - 0.5 * (lam2 - gamma0) / lam * (n * se[1] / np.sqrt(s2))
    )
    cvs = df_critical_values(n)
    return UnitRootResult(
        test="pp",
        statistic=stat,
        lags_or_bandwidth=bw,
        n_obs=n,
        critical_values=cvs,
        p_value_bracket=_bracket(stat, cvs),
    )


# -- pooled panel test -------------------------------------------------------

def _longest_run(mask: np.ndarray) -> tuple[int, int]:
    """(start, length) of the first longest run of True values."""
    best_start = best_len = 0
    start = None
    for i, present in enumerate(list(mask) + [False]):
        if present and start is None:
            start = i
        elif not present and start is not None:
            if i - start > best_len:
                best_start, best_len = start, i - start
            start = None
    return best_start, best_len


def _bartlett_long_run(x: np.ndarray, trunc: int) -> float:
    # no demeaning: the input is a differenced driftless series, and the
    # demeaning term biases every autocovariance by -var/n, which at the
    # tabulated window width deflates the variance ratio and miscenters
    # the adjusted statistic
    t = len(x)
    out = float(x @ x) / (t - 1)
    for lag in range(1, min(trunc, t - 1) + 1):
        w = 1.0 - lag / (trunc + 1.0)
        out += 2.0 * w * float(x[lag:] @ x[:-lag]) / (t - 1)
    return out


def _llc_statistic(series_list: list[np.ndarray], lags: int) -> tuple[float, float, int]:
    """Bias-adjusted pooled t from complete per-entity stretches.

    Returns (t_star, t_rho, total_obs). Each series enters through two
    auxiliary regressions that partial lagged differences and an
    intercept out of the current difference and the lagged level; the
    normalized residuals are pooled into one first-order regression
    whose t-ratio is recentered and rescaled by the embedded constants.
    """
    e_all: list[np.ndarray] = []
    v_all: list[np.ndarray] = []
    ratios: list[float] = []
    sizes: list[int] = []
    for y in series_list:
        dy = np.diff(y)
        rows = len(dy) - lags
        W = [np.ones(rows)]
        for j in range(1, lags + 1):
            W.append(dy[lags - j : len(dy) - j])
        W = np.column_stack(W)
        target_d = dy[lags:]
        target_v = y[lags:-1]
        bd, _, _, _ = np.linalg.lstsq(W, target_d, rcond=None)
        bv, _, _, _ = np.linalg.lstsq(W, target_v, rcond=None)
        e = target_d - W @ bd
        v = target_v - W @ bv
        rho_i = float(e @ v) / float(v @ v)
        resid = e - rho_i * v
        s2_eps = float(resid @ resid) / rows
        if s2_eps <= 0.0:
            raise DegenerateInputError("zero innovation variance in one entity")
        s_eps = np.sqrt(s2_eps)
        trunc = int(np.floor(3.21 * len(y) ** (1.0 / 3.0)))
        s2_y = _bartlett_long_run(dy, trunc)
        if s2_y <= 0.0:
            raise DegenerateInputError("non-positive long-run variance in one entity")
        ratios.append(np.sqrt(s2_y) / s_eps)
        e_all.append(e / s_eps)
        v_all.append(v / s_eps)
        sizes.append(rows)

    e = np.concatenate(e_all)
    v = np.concatenate(v_all)
    total = len(e)
    svv = float(v @ v)
    rho = float(e @ v) / svv
    resid = e - rho * v
    s2_tilde = float(resid @ resid) / total
    std_rho = np.sqrt(s2_tilde / svv)
    t_rho = rho / std_rho
    n_entities = len(series_list)
    t_bar = float(np.mean(sizes))
    s_bar = float(np.mean(ratios))
    mu = _interp_inverse(t_bar, _ADJ_ROWS, _ADJ_MU)
    sig = _interp_inverse(t_bar, _ADJ_ROWS, _ADJ_SIG)
    t_star = (t_rho - n_entities * t_bar * s_bar * std_rho * mu / s2_tilde) / sig
    return float(t_star), float(t_rho), total


def llc_test(
    panel: PanelDataset,
    variable: str,
    lags: int = 1,
    cross_demean: bool = False,
) -> UnitRootResult:
    """Pooled panel unit-root test with per-entity nuisance normalization.

    Entities contribute their first longest uninterrupted stretch; those
    with fewer than ``lags + 15`` consecutive present observations (or a
    constant stretch) are excluded and recorded on the result. The
    adjusted statistic is asymptotically standard normal, rejected in
    the lower tail. ``cross_demean`` subtracts the per-period average
    over available entities first, the standard guard against a common
    time effect that would otherwise shrink the effective cross-section
    and oversize the pooled statistic.
    """
    if lags < 0:
        raise ValueError("lags must be >= 0")
    values = panel.values(variable)
    if cross_demean:
        present = ~np.isnan(values)
        sums = np.where(present, values, 0.0).sum(axis=0)
        counts = np.maximum(present.sum(axis=0), 1)
        values = values - sums / counts
    series_list: list[np.ndarray] = []
    excluded: list[str] = []
    samples: dict[str, int] = {}
    floor = lags + 15
    for i, entity in enumerate(panel.entities):
        present = ~np.isnan(values[i])
        start, length = _longest_run(present)
        if length < floor:
            excluded.append(entity)
            continue
        y = values[i, start : start + length]
        if np.ptp(y) == 0.0:
            excluded.append(entity)
            continue
        series_list.append(y)
        samples[entity] = length - 1 - lags
    if len(series_list) < 2:
        raise InsufficientDataError(
            f"{len(series_list)} of {panel.n_entities} entities have a usable "
            f"{floor}-observation stretch of {variable!r}; need at least 2"
        )
    t_star, _, total = _llc_statistic(series_list, lags)
    cvs = dict(_NORMAL_CVS)
    return UnitRootResult(
        test="llc",
        statistic=t_star,
        lags_or_bandwidth=lags,
        n_obs=total,
        critical_values=cvs,
        p_value_bracket=_bracket(t_star, cvs),
        excluded_entities=tuple(excluded),
        entity_samples=samples,
    )


# -- critical value simulation ------------------------------------------------

@dataclass
class CriticalValueSimulation:
    test: str
    n: int
    reps: int
    quantiles: dict[str, float]
    mean: float
    variance: float


def _vectorized_t(chunk: np.ndarray) -> np.ndarray:
    """Unaugmented intercept-case t statistic, one value per row."""
    x = chunk[:, :-1]
    d = np.diff(chunk, axis=1)
    m = x.shape[1]
    xm = x - x.mean(axis=1, keepdims=True)
    dm = d - d.mean(axis=1, keepdims=True)
    sxx = np.einsum("ij,ij->i", xm, xm)
    sxd = np.einsum("ij,ij->i", xm, dm)
    rho = sxd / sxx
    resid = dm - rho[:, None] * xm
    s2 = np.einsum("ij,ij->i", resid, resid) / (m - 2)
    return rho / np.sqrt(s2 / sxx)


def _vectorized_pp(chunk: np.ndarray) -> np.ndarray:
    x = chunk[:, :-1]
    d = np.diff(chunk, axis=1)
    m = x.shape[1]
    bw = default_bandwidth(m)
    xm = x - x.mean(axis=1, keepdims=True)
    dm = d - d.mean(axis=1, keepdims=True)
    sxx = np.einsum("ij,ij->i", xm, xm)
    sxd = np.einsum("ij,ij->i", xm, dm)
    rho = sxd / sxx
    u = dm - rho[:, None] * xm
    uu = np.einsum("ij,ij->i", u, u)
    s2 = uu / (m - 2)
    se = np.sqrt(s2 / sxx)
    t_rho = rho / se
    gamma0 = uu / m
    lam2 = gamma0.copy()
    for j in range(1, bw + 1):
        w = 1.0 - j / (bw + 1.0)
        lam2 += 2.0 * w * np.einsum("ij,ij->i", u[:, j:], u[:, :-j]) / m
    lam = np.sqrt(lam2)
    return np.sqrt(gamma0 / lam2) * t_rho - 0.5 * (lam2 - gamma0) / lam * (m * se / np.sqrt(s2))


def simulate_critical_values(
    test: str,
    n: int,
    reps: int,
    seed: int,
    n_entities: int = 10,
    lags: int = 1,
) -> CriticalValueSimulation:
    """Monte Carlo null distribution on driftless random walks.

    For the single-series tests ``n`` is the series length (statistics
    use the same formulas as the test functions; the unaugmented case is
    evaluated in vectorized form). For the pooled test ``n`` is the
    per-entity length and ``n_entities`` panels are pooled per draw.
    """
    if reps < 1000:
        raise ValueError(f"reps must be >= 1000 for stable quantiles, got {reps}")
    if test not in ("adf", "pp", "llc"):
        raise ValueError(f"unknown test {test!r}; expected adf, pp, or llc")
    stats = np.empty(reps)
    if test in ("adf", "pp"):
        fn = _vectorized_t if test == "adf" else _vectorized_pp
        chunk_size = max(1, min(4000, int(2e7) // max(n, 1)))
        done = 0
        chunk_id = 0
        while done < reps:
            take = min(chunk_size, reps - done)
            steps = substream(seed, chunk_id).standard_normal((take, n))
            walks = np.cumsum(steps, axis=1)
            stats[done : done + take] = fn(walks)
            done += take
            chunk_id += 1
    else:
        for rep in range(reps):
            rng = substream(seed, rep)
            steps = rng.standard_normal((n_entities, n))
            walks = np.cumsum(steps, axis=1)
            series = [walks[i] for i in range(n_entities)]
            stats[rep], _, _ = _llc_statistic(series, lags)
    qs = np.percentile(stats, [1, 5, 10])
    return CriticalValueSimulation(
        test=test,
        n=n,
        reps=reps,
        quantiles={"1%": float(qs[0]), "5%": float(qs[1]), "10%": float(qs[2])},
        mean=float(np.mean(stats)),
        variance=float(np.var(stats, ddof=1)),
    )
