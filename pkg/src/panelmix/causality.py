"""Wald tests of lead-lag predictive content on the pooled panel.

Each test asks whether the lag block of one series adds predictive
content for the effect series beyond the effect's own lags and shared
controls, after removing entity fixed effects. The covariance is
heteroskedasticity-robust, so firms of very different scale can share
one regression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

from .errors import DegenerateInputError, InsufficientDataError, RankDeficiencyError
from .panel import PanelDataset, add_lags


@dataclass
class WaldTestResult:
    """One restriction test; the null is that every cause-lag coefficient
    in the effect equation is zero.
    """

    null_label: str
    statistic: float
    df: int
    p_value: float
    lags: int
    cause: str
    effect: str

    @property
    def marker(self) -> str:
        """Significance marker: 'a' at 1%, 'b' at 5%, '' otherwise."""
        if self.p_value < 0.01:
            return "a"
        if self.p_value < 0.05:
            return "b"
        return ""

    def to_json_record(self) -> dict:
        return {
            "null": self.null_label,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "lags": self.lags,
            "marker": self.marker,
        }


@dataclass
class GrangerRow:
    """Suite row: a result, or the error that prevented one."""

    cause: str
    result: WaldTestResult | None
    error: str | None

    def to_json_record(self) -> dict:
        if self.result is not None:
            return self.result.to_json_record()
        return {"null": None, "cause": self.cause, "error": self.error}


def _null_label(cause: str, effect: str) -> str:
    return f"{cause} does not Granger cause {effect}"


class _FePooledFit:
    """Within-transformed pooled least squares with robust covariance."""

    def __init__(self, panel: PanelDataset, effect: str, lag_columns: list[str], lags: int):
        base = sorted({effect} | {c.rsplit("_l", 1)[0] for c in lag_columns})
        raw_present = ~np.isnan(panel.values(base[0]))
        for name in base[1:]:
            raw_present &= ~np.isnan(panel.values(name))
        lengths = raw_present.sum(axis=1)
        short = [
            panel.entities[i]
            for i in range(panel.n_entities)
            if 0 < lengths[i] <= lags
        ]
        if short:
            raise InsufficientDataError(
                f"lag order {lags} meets or exceeds the sample length of: "
                + ", ".join(short)
            )
        work = add_lags(panel, base, lags)
        columns = [effect] + lag_columns
        mats = [work.values(c) for c in columns]
        present = ~np.isnan(mats[0])
        for m in mats[1:]:
            present &= ~np.isnan(m)
        ent_idx, per_idx = np.nonzero(present)
        if len(ent_idx) == 0:
            raise InsufficientDataError("no complete rows after lag construction")
        data = np.column_stack([m[ent_idx, per_idx] for m in mats])
        used = np.unique(ent_idx)
        remap = np.zeros(panel.n_entities, dtype=int)
        remap[used] = np.arange(len(used))
        codes = remap[ent_idx]
        n_ent = len(used)
        cnt = np.bincount(codes, minlength=n_ent).astype(float)
        demeaned = np.empty_like(data)
        for j in range(data.shape[1]):
            means = np.bincount(codes, weights=data[:, j], minlength=n_ent) / cnt
            demeaned[:, j] = data[:, j] - means[codes]
        self.y = demeaned[:, 0]
        self.X = demeaned[:, 1:]
        self.columns = lag_columns
        self.n = len(self.y)
        self.n_entities = n_ent
        scale = float(np.max(np.abs(self.X), initial=0.0))
        q, r = np.linalg.qr(self.X)
        bad = np.abs(np.diag(r)) <= 1e-10 * max(1.0, scale)
        if np.any(bad):
            j = int(np.nonzero(bad)[0][0])
            raise RankDeficiencyError(
                f"within-transformed design is rank deficient at {lag_columns[j]!r}",
                column=lag_columns[j],
            )
        self.beta = np.linalg.solve(r, q.T @ self.y)
        resid = self.y - self.X @ self.beta
        xtx_inv = np.linalg.inv(self.X.T @ self.X)
        meat = (self.X * resid[:, None] ** 2).T @ self.X
        k_total = self.X.shape[1] + n_ent
        if self.n <= k_total:
            raise InsufficientDataError(
                f"{self.n} rows for {k_total} parameters including entity effects"
            )
        self.vcov = xtx_inv @ meat @ xtx_inv * (self.n / (self.n - k_total))

    def wald(self, block: list[int]) -> tuple[float, int]:
        b = self.beta[block]
        V = self.vcov[np.ix_(block, block)]
        try:
            sol = np.linalg.solve(V, b)
        except np.linalg.LinAlgError:
            raise DegenerateInputError(
                "restricted coefficient covariance is singular"
            ) from None
        stat = float(b @ sol)
        if not np.isfinite(stat) or stat < 0.0:
            raise DegenerateInputError(
                "restricted coefficient covariance is not positive definite"
            )
        return stat, len(block)


def _check_cause_variance(panel: PanelDataset, cause: str) -> None:
    vals = panel.values(cause)
    finite = vals[~np.isnan(vals)]
    if finite.size == 0 or float(np.ptp(finite)) == 0.0:
        raise DegenerateInputError(
            f"cause series {cause!r} has no variation; test undefined"
        )


def _lag_names(name: str, lags: int) -> list[str]:
    return [f"{name}_l{k}" for k in range(1, lags + 1)]


def granger_wald_test(
    panel: PanelDataset,
    cause: str,
    effect: str,
    lags: int = 3,
    controls: list[str] | None = None,
) -> WaldTestResult:
    """Test whether ``cause`` lags predict ``effect`` beyond its own lags.

    The effect equation contains lags 1..lags of the effect, the cause,
    and any control series, with entity fixed effects removed by the
    within transformation. The statistic is the robust Wald form on the
    cause-lag block, referred to chi-square with ``lags`` degrees of
    freedom.
    """
    if lags < 1:
        raise ValueError("lags must be >= 1")
    _check_cause_variance(panel, cause)
    lag_cols = _lag_names(effect, lags) + _lag_names(cause, lags)
    for ctl in controls or []:
        lag_cols += _lag_names(ctl, lags)
    fit = _FePooledFit(panel, effect, lag_cols, lags)
    block = list(range(lags, 2 * lags))
    stat, df = fit.wald(block)
    return WaldTestResult(
        null_label=_null_label(cause, effect),
        statistic=stat,
        df=df,
        p_value=float(sstats.chi2.sf(stat, df)),
        lags=lags,
        cause=cause,
        effect=effect,
    )


def granger_suite(
    panel: PanelDataset,
    effect: str,
    causes: list[str],
    lags: int = 3,
) -> list[GrangerRow]:
    """One test per cause from a single shared regression.

    All causes' lag blocks enter the effect equation together, so each
    test controls for the other candidate causes. Causes that cannot be
    tested (no variation, or their lags make the design singular) are
    reported as error rows while the rest are still tested; rows keep the
    input order.
    """
    if lags < 1:
        raise ValueError("lags must be >= 1")
    rows: dict[str, GrangerRow] = {}
    active = []
    for cause in causes:
        try:
            _check_cause_variance(panel, cause)
            active.append(cause)
        except DegenerateInputError as e:
            rows[cause] = GrangerRow(cause=cause, result=None, error=str(e))
    while True:
        if not active:
            break
        lag_cols = _lag_names(effect, lags)
        for cause in active:
            lag_cols += _lag_names(cause, lags)
        try:
            fit = _FePooledFit(panel, effect, lag_cols, lags)
        except RankDeficiencyError as e:
            culprit = next(
                (c for c in active if e.column in _lag_names(c, lags)), None
            )
            if culprit is None:
                raise
            rows[culprit] = GrangerRow(cause=culprit, result=None, error=str(e))
            active = [c for c in active if c != culprit]
            continue
        for pos, cause in enumerate(active):
            block = list(range(lags * (pos + 1), lags * (pos + 2)))
            try:
                stat, df = fit.wald(block)
            except DegenerateInputError as e:
                rows[cause] = GrangerRow(cause=cause, result=None, error=str(e))
                continue
            rows[cause] = GrangerRow(
                cause=cause,
                result=WaldTestResult(
                    null_label=_null_label(cause, effect),
                    statistic=stat,
                    df=df,
                    p_value=float(sstats.chi2.sf(stat, df)),
                    lags=lags,
                    cause=cause,
                    effect=effect,
                ),
                error=None,
            )
        break
    return [rows[c] for c in causes]


def suite_to_csv_text(rows: list[GrangerRow]) -> str:
    lines = ["null_hypothesis,chi_square,df,p_value,marker"]
    for row in rows:
        if row.result is None:
            lines.append(f"{_csv_quote('test failed: ' + (row.error or ''))},,,,")
            continue
        r = row.result
        lines.append(
            f"{_csv_quote(r.null_label)},{float(r.statistic)!r},{r.df},"
            f"{float(r.p_value)!r},{r.marker}"
        )
    return "\n".join(lines) + "\n"


def _csv_quote(text: str) -> str:
    if "," in text or '"' in text:
        return '"' + text.replace('"', '""') + '"'
    return text
