"""Lag-order selection for the stacked system.

All candidate orders are fit by least squares on the common sample
implied by the largest candidate, so criteria are comparable; shorter
orders reuse the leading lag blocks of the widest design.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError
from ..panel import PanelDataset
from .design import build_midas_design

_CRITERIA = ("aic", "bic", "hqic", "fpe")


@dataclass
class LagSelection:
    """Criterion values per candidate order and the per-criterion choice."""

    p_max: int
    table: dict[int, dict[str, float]]
    chosen: dict[str, int]

    @property
    def auto(self) -> int:
        """Most frequently chosen order across criteria; ties go smaller."""
        counts = Counter(self.chosen.values())
        best = max(counts.values())
        return min(p for p, c in counts.items() if c == best)

    def to_json_record(self) -> dict:
        return {
            "p_max": self.p_max,
            "criteria": {
                str(p): {k: self.table[p][k] for k in _CRITERIA}
                for p in sorted(self.table)
            },
            "chosen": dict(self.chosen),
            "auto": self.auto,
        }


def select_lag_order(
    hf: PanelDataset | None,
    lf: PanelDataset,
    p_max: int,
    hf_series: list[str] | None = None,
    lf_series: list[str] | None = None,
) -> LagSelection:
    """Score lag orders 1..p_max by the four standard determinant criteria.

    Each candidate is an equation-wise least-squares fit; the criteria are
    computed from the log determinant of the residual moment matrix with
    the usual penalty weights, and each criterion picks its argmin (ties
    resolved toward the smaller order).
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    design = build_midas_design(hf, lf, p_max, hf_series=hf_series, lf_series=lf_series)
    K = design.K
    Y = design.Y
    T = design.n_rows
    # Penalties scale with the distinct low-frequency periods, not pooled
    # rows: shared high-frequency columns repeat identically across
    # entities, so pooled-row penalties shrink toward zero and every
    # criterion drifts to p_max. For a single entity the two counts agree.
    T_pen = len(set(design.row_periods))
    table: dict[int, dict[str, float]] = {}
    for p in range(1, p_max + 1):
        X = design.X[:, : 1 + K * p]
        b, _, _, _ = np.linalg.lstsq(X, Y, rcond=None)
        E = Y - X @ b
        sign, logdet = np.linalg.slogdet(E.T @ E / T)
        if sign <= 0:
            raise DegenerateInputError(
                f"singular residual covariance at lag order {p}"
            )
        free = p * K * K + K
        per_eq = K * p + 1
        if T_pen <= per_eq:
            raise DegenerateInputError(
                f"{T_pen} distinct periods cannot identify {per_eq} "
                f"coefficients per equation at p={p}"
            )
        table[p] = {
            "aic": logdet + 2.0 * free / T_pen,
            "bic": logdet + math.log(T_pen) * free / T_pen,
            "hqic": logdet + 2.0 * math.log(math.log(T_pen)) * free / T_pen,
            "fpe": ((T_pen + per_eq) / (T_pen - per_eq)) ** K
            * math.exp(logdet),
        }
    chosen = {
        crit: min(table, key=lambda p: (table[p][crit], p)) for crit in _CRITERIA
    }
    return LagSelection(p_max=p_max, table=table, chosen=chosen)
