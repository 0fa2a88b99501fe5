"""Stacked mixed-frequency VAR design.

Each low-frequency period's intra-period high-frequency observations
become separate columns of one stacked vector, so a monthly series
contributes three quarterly columns. Column order is the contract used
everywhere downstream, including the recursive shock ordering: each
high-frequency series contributes its slots earliest-first as adjacent
columns, series in input order, followed by the low-frequency series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AlignmentError, InsufficientDataError
from ..panel import (
    MONTHLY,
    PERIODS_PER_YEAR,
    PanelDataset,
    Period,
    QUARTERLY,
    format_period,
)


@dataclass
class MidasDesign:
    """Pooled regression layout Y = X B + E for the stacked system.

    ``X`` holds an intercept column followed by ``p`` stacked lags of the
    ``K`` design columns (most recent lag first). Low-frequency variables
    are demeaned within entity before stacking; rows are complete cases
    only. ``row_entities``/``row_periods`` record, per pooled row, the
    originating entity code and low-frequency timeline position.
    """

    m: int
    k_h: int
    k_l: int
    p: int
    Y: np.ndarray
    X: np.ndarray
    columns: tuple[str, ...]
    hf_names: tuple[str, ...]
    lf_names: tuple[str, ...]
    entities: tuple[str, ...]
    row_entities: np.ndarray
    row_periods: np.ndarray

    @property
    def K(self) -> int:
        return self.m * self.k_h + self.k_l

    @property
    def n_rows(self) -> int:
        return int(self.Y.shape[0])

    def lag_column_labels(self) -> tuple[str, ...]:
        """Names of the X columns: const, then each lag block."""
        labels = ["const"]
        for lag in range(1, self.p + 1):
            labels.extend(f"{c}.l{lag}" for c in self.columns)
        return tuple(labels)


def _quarter_months(q: Period) -> list[Period]:
    base = (q.index - 1) * 3
    return [Period(q.year, base + j) for j in (1, 2, 3)]


def build_midas_design(
    hf: PanelDataset | None,
    lf: PanelDataset,
    p: int,
    hf_series: list[str] | None = None,
    lf_series: list[str] | None = None,
) -> MidasDesign:
    """Stack monthly series into quarterly slot columns and build lags.

    ``hf`` may be None (plain low-frequency VAR), a single-entity panel
    shared by every low-frequency entity, or a panel over the same
    entities. Every quarter of the low-frequency timeline must have all
    of its months on the high-frequency timeline; a gap is an alignment
    error naming the quarter. Pooling is by vertical concatenation with
    low-frequency variables demeaned within entity.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if lf.frequency != QUARTERLY:
        raise ValueError(f"low-frequency panel must be quarterly, got {lf.frequency!r}")
    lf_names = tuple(lf_series) if lf_series is not None else lf.variables
    if not lf_names:
        raise ValueError("no low-frequency series selected")

    m = 1
    hf_names: tuple[str, ...] = ()
    hf_rows: np.ndarray | None = None  # (n_hf_entities, T_L, m*k_h)
    if hf is not None:
        if hf.frequency != MONTHLY:
            raise ValueError(f"high-frequency panel must be monthly, got {hf.frequency!r}")
        hf_names = tuple(hf_series) if hf_series is not None else hf.variables
        if not hf_names:
            raise ValueError("no high-frequency series selected")
        if hf.n_entities != 1 and hf.entities != lf.entities:
            raise AlignmentError(
                "high-frequency panel must have one shared entity or the "
                "same entities as the low-frequency panel"
            )
        m = PERIODS_PER_YEAR[MONTHLY] // PERIODS_PER_YEAR[QUARTERLY]
        slot_idx = np.empty((lf.n_periods, m), dtype=int)
        for t, q in enumerate(lf.timeline):
            for j, month in enumerate(_quarter_months(q)):
                try:
                    slot_idx[t, j] = hf.period_index(month)
                except KeyError:
                    raise AlignmentError(
                        f"quarter {format_period(q, QUARTERLY)} lacks month "
                        f"{format_period(month, MONTHLY)} on the high-frequency timeline"
                    ) from None
        k_h = len(hf_names)
        hf_rows = np.empty((hf.n_entities, lf.n_periods, m * k_h))
        for s, name in enumerate(hf_names):
            vals = hf.values(name)
            for j in range(m):
                hf_rows[:, :, m * s + j] = vals[:, slot_idx[:, j]]

    k_h = len(hf_names)
    k_l = len(lf_names)
    K = m * k_h + k_l

    columns: list[str] = []
    for name in hf_names:
        columns.extend(f"{name}[m{j}]" for j in range(1, m + 1))
    columns.extend(lf_names)

    y_rows: list[np.ndarray] = []
    x_rows: list[np.ndarray] = []
    row_ent: list[int] = []
    row_per: list[int] = []
    for e in range(lf.n_entities):
        stacked = np.empty((lf.n_periods, K))
        col = 0
        if hf_rows is not None:
            source = hf_rows[0] if hf_rows.shape[0] == 1 else hf_rows[e]
            stacked[:, : m * k_h] = source
            col = m * k_h
        for name in lf_names:
            series = lf.values(name)[e]
            mean = float(np.nanmean(series)) if np.any(~np.isnan(series)) else 0.0
            stacked[:, col] = series - mean
            col += 1
        finite = np.all(np.isfinite(stacked), axis=1)
        for t in range(p, lf.n_periods):
            if not finite[t] or not np.all(finite[t - p : t]):
                continue
            y_rows.append(stacked[t])
            x_rows.append(
                np.concatenate([[1.0]] + [stacked[t - lag] for lag in range(1, p + 1)])
            )
            row_ent.append(e)
            row_per.append(t)
    if not y_rows:
        raise InsufficientDataError(
            f"no complete stacked rows at lag order {p}; check missing values"
        )
    return MidasDesign(
        m=m,
        k_h=k_h,
        k_l=k_l,
        p=p,
        Y=np.asarray(y_rows),
        X=np.asarray(x_rows),
        columns=tuple(columns),
        hf_names=hf_names,
        lf_names=lf_names,
        entities=lf.entities,
        row_entities=np.asarray(row_ent, dtype=int),
        row_periods=np.asarray(row_per, dtype=int),
    )
