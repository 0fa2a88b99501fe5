"""Panel data containers, CSV ingestion, and deterministic transformations.

A :class:`PanelDataset` is an immutable rectangle over (entity, period):
every variable is stored as an entities-by-periods float array with NaN
marking absent cells, and the timeline is a contiguous, strictly
increasing run of period stamps. Unbalanced panels are expressed purely
through the missingness mask, never through ragged storage.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    InsufficientDataError,
    IntegrityError,
    PeriodParseError,
    RankDeficiencyError,
)

QUARTERLY = "quarterly"
MONTHLY = "monthly"

PERIODS_PER_YEAR = {QUARTERLY: 4, MONTHLY: 12}

_QUARTER_RE = re.compile(r"^(\d{4})Q([1-4])$")
_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=True)
class Period:
    """One period stamp: calendar year plus within-year index (1-based)."""

    year: int
    index: int


def parse_period(stamp: str, frequency: str) -> Period:
    """Parse ``1990Q1`` (quarterly) or ``1990-03`` (monthly) stamps."""
    stamp = stamp.strip()
    if frequency == QUARTERLY:
        m = _QUARTER_RE.match(stamp)
        if m is None:
            raise PeriodParseError(f"malformed quarterly stamp {stamp!r} (expected YYYYQn)")
        return Period(int(m.group(1)), int(m.group(2)))
    if frequency == MONTHLY:
        m = _MONTH_RE.match(stamp)
        if m is None:
            raise PeriodParseError(f"malformed monthly stamp {stamp!r} (expected YYYY-MM)")
        month = int(m.group(2))
        if not 1 <= month <= 12:
            raise PeriodParseError(f"month out of range in stamp {stamp!r}")
        return Period(int(m.group(1)), month)
    raise ValueError(f"unknown frequency {frequency!r}")


def format_period(period: Period, frequency: str) -> str:
    if frequency == QUARTERLY:
        return f"{period.year}Q{period.index}"
    if frequency == MONTHLY:
        return f"{period.year}-{period.index:02d}"
    raise ValueError(f"unknown frequency {frequency!r}")


def period_after(period: Period, frequency: str) -> Period:
    per_year = PERIODS_PER_YEAR[frequency]
    if period.index < per_year:
        return Period(period.year, period.index + 1)
    return Period(period.year + 1, 1)


def period_range(first: Period, last: Period, frequency: str) -> tuple[Period, ...]:
    """Contiguous inclusive run of periods from first to last."""
    if last < first:
        raise ValueError("last period precedes first period")
    out = [first]
    while out[-1] < last:
        out.append(period_after(out[-1], frequency))
    return tuple(out)


class PanelDataset:
    """Immutable rectangular panel over (entity, period).

    Parameters
    ----------
    entities : sequence of str
        Entity identifiers; stored sorted and unique.
    timeline : sequence of Period
        Strictly increasing, contiguous period stamps.
    frequency : str
        ``"quarterly"`` or ``"monthly"``.
    values : mapping of str to ndarray
        One (n_entities, n_periods) float array per variable; NaN cells
        are absent. Arrays are copied and frozen.
    """

    def __init__(
        self,
        entities: Sequence[str],
        timeline: Sequence[Period],
        frequency: str,
        values: Mapping[str, np.ndarray],
    ):
        if frequency not in PERIODS_PER_YEAR:
            raise ValueError(f"unknown frequency {frequency!r}")
        ents = tuple(entities)
        if len(set(ents)) != len(ents):
            raise IntegrityError("duplicate entity identifiers")
        tl = tuple(timeline)
        for prev, cur in zip(tl, tl[1:]):
            if cur != period_after(prev, frequency):
                raise IntegrityError(
                    f"timeline not contiguous at {format_period(prev, frequency)} -> "
                    f"{format_period(cur, frequency)}"
                )
        shape = (len(ents), len(tl))
        vals: dict[str, np.ndarray] = {}
        for name, arr in values.items():
            a = np.asarray(arr, dtype=float).copy()
            if a.shape != shape:
                raise IntegrityError(
                    f"variable {name!r} has shape {a.shape}, expected {shape}"
                )
            a.flags.writeable = False
            vals[name] = a
        self._entities = ents
        self._timeline = tl
        self._frequency = frequency
        self._values = vals

    # -- structure ---------------------------------------------------------

    @property
    def entities(self) -> tuple[str, ...]:
        return self._entities

    @property
    def timeline(self) -> tuple[Period, ...]:
        return self._timeline

    @property
    def frequency(self) -> str:
        return self._frequency

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self._values.keys())

    @property
    def n_entities(self) -> int:
        return len(self._entities)

    @property
    def n_periods(self) -> int:
        return len(self._timeline)

    def entity_index(self, entity: str) -> int:
        try:
            return self._entities.index(entity)
        except ValueError:
            raise KeyError(f"unknown entity {entity!r}") from None

    def period_index(self, period: Period) -> int:
        if not self._timeline:
            raise KeyError("empty timeline")
        first = self._timeline[0]
        per_year = PERIODS_PER_YEAR[self._frequency]
        offset = (period.year - first.year) * per_year + (period.index - first.index)
        if not 0 <= offset < len(self._timeline):
            raise KeyError(f"period {format_period(period, self._frequency)} outside timeline")
        return offset

    # -- data access -------------------------------------------------------

    def values(self, variable: str) -> np.ndarray:
        """Read-only (n_entities, n_periods) array; NaN marks absence."""
        try:
            return self._values[variable]
        except KeyError:
            raise KeyError(f"unknown variable {variable!r}") from None

    def mask(self, variable: str) -> np.ndarray:
        """Boolean presence array aligned with :meth:`values`."""
        return ~np.isnan(self.values(variable))

    def column(self, entity: str, variable: str) -> np.ndarray:
        return self.values(variable)[self.entity_index(entity)]

    # -- derivation --------------------------------------------------------

    def with_variables(self, new: Mapping[str, np.ndarray]) -> "PanelDataset":
        """Return a copy with variables added or replaced."""
        merged = dict(self._values)
        merged.update(new)
        return PanelDataset(self._entities, self._timeline, self._frequency, merged)

    def select(self, variables: Sequence[str]) -> "PanelDataset":
        return PanelDataset(
            self._entities,
            self._timeline,
            self._frequency,
            {name: self.values(name) for name in variables},
        )

    def broadcast_to_entities(self, entities: Sequence[str]) -> "PanelDataset":
        """Replicate a single-entity panel's rows across a new entity set."""
        if self.n_entities != 1:
            raise IntegrityError("broadcast requires a single-entity panel")
        vals = {
            name: np.repeat(arr, len(entities), axis=0)
            for name, arr in self._values.items()
        }
        return PanelDataset(entities, self._timeline, self._frequency, vals)


@dataclass
class CsvSchema:
    """Column-name mapping for panel CSV files.

    ``variables`` maps CSV column names to canonical variable names; a
    plain sequence means the names coincide.
    """

    entity: str = "entity"
    period: str = "period"
    variables: Mapping[str, str] | Sequence[str] | None = None

    def variable_map(self, header: Sequence[str]) -> dict[str, str]:
        if self.variables is None:
            return {c: c for c in header if c not in (self.entity, self.period)}
        if isinstance(self.variables, Mapping):
            return dict(self.variables)
        return {c: c for c in self.variables}


def load_panel_csv(path: str, schema: CsvSchema, frequency: str) -> PanelDataset:
    """Load a long-format panel CSV into a :class:`PanelDataset`.

    Empty cells mean missing. Malformed stamps raise a parse error with
    the 1-based file row number; duplicate (entity, period) rows raise an
    integrity error naming the key.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IntegrityError(f"{path}: empty CSV") from None
        header = [h.strip() for h in header]
        for required in (schema.entity, schema.period):
            if required not in header:
                raise IntegrityError(f"{path}: column {required!r} not in header")
        var_map = schema.variable_map(header)
        for col in var_map:
            if col not in header:
                raise IntegrityError(f"{path}: column {col!r} not in header")
        col_idx = {c: header.index(c) for c in header}
        ent_i = col_idx[schema.entity]
        per_i = col_idx[schema.period]

        records: dict[tuple[str, Period], dict[str, float]] = {}
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            entity = row[ent_i].strip()
            if not entity:
                raise IntegrityError(f"{path} row {rownum}: empty entity")
            try:
                period = parse_period(row[per_i], frequency)
            except PeriodParseError as exc:
                raise PeriodParseError(str(exc), row=rownum) from None
            key = (entity, period)
            if key in records:
                raise IntegrityError(
                    f"{path} row {rownum}: duplicate key "
                    f"{entity}/{format_period(period, frequency)}"
                )
            cells: dict[str, float] = {}
            for col, name in var_map.items():
                raw = row[col_idx[col]].strip()
                if raw == "":
                    cells[name] = math.nan
                    continue
                try:
                    cells[name] = float(raw)
                except ValueError:
                    raise IntegrityError(
                        f"{path} row {rownum}: non-numeric value {raw!r} in column {col!r}"
                    ) from None
            records[key] = cells

    if not records:
        raise IntegrityError(f"{path}: no data rows")
    entities = sorted({e for e, _ in records})
    periods = [p for _, p in records]
    timeline = period_range(min(periods), max(periods), frequency)
    names = list(var_map.values())
    shape = (len(entities), len(timeline))
    arrays = {name: np.full(shape, np.nan) for name in names}
    e_idx = {e: i for i, e in enumerate(entities)}
    first = timeline[0]
    per_year = PERIODS_PER_YEAR[frequency]
    for (entity, period), cells in records.items():
        t = (period.year - first.year) * per_year + (period.index - first.index)
        i = e_idx[entity]
        for name, v in cells.items():
            arrays[name][i, t] = v
    return PanelDataset(entities, timeline, frequency, arrays)


def write_panel_csv(
    data: PanelDataset,
    path: str,
    entity_col: str = "entity",
    period_col: str = "period",
) -> None:
    """Write the loader-compatible long format; absent cells as empty strings.

    Rows fully absent across all variables are skipped, so a round trip
    through :func:`load_panel_csv` reproduces the dataset.
    """
    names = list(data.variables)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([entity_col, period_col] + names)
        for i, entity in enumerate(data.entities):
            for t, period in enumerate(data.timeline):
                cells = [data.values(n)[i, t] for n in names]
                if all(math.isnan(c) for c in cells):
                    continue
                writer.writerow(
                    [entity, format_period(period, data.frequency)]
                    + ["" if math.isnan(c) else repr(float(c)) for c in cells]
                )


# -- financial ratios ------------------------------------------------------

RATIO_DEFINITIONS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    # ratio -> (numerator fields summed, denominator fields summed)
    "cr": (("current_assets",), ("current_liabilities",)),
    "quick": (
        ("cash", "cash_equivalents", "marketable_securities", "receivables_net"),
        ("current_liabilities",),
    ),
    "da": (("total_debt",), ("total_assets",)),
    "q": (("market_value_equity", "market_value_debt"), ("replacement_cost",)),
}


@dataclass
class RatioWarningReport:
    """Per-ratio counts of cells masked or flagged during derivation."""

    rows: list[dict] = field(default_factory=list)

    def to_json_lines(self) -> str:
        import json

        return "\n".join(json.dumps(r, sort_keys=True) for r in self.rows)


def derive_financial_ratios(
    data: PanelDataset, ratios: Sequence[str] = ("cr", "quick", "da", "q")
) -> tuple[PanelDataset, RatioWarningReport]:
    """Derive liquidity/leverage/valuation ratios from raw balance columns.

    Cells with a zero denominator are masked and counted; negative
    denominators are computed but counted as flagged. Non-finite results
    are masked. The returned dataset holds only the requested ratios.
    """
    report = RatioWarningReport()
    out: dict[str, np.ndarray] = {}
    for ratio in ratios:
        if ratio not in RATIO_DEFINITIONS:
            raise KeyError(f"unknown ratio {ratio!r}")
        num_fields, den_fields = RATIO_DEFINITIONS[ratio]
        for f in num_fields + den_fields:
            if f not in data.variables:
                raise KeyError(f"ratio {ratio!r} requires input column {f!r}")
        num = sum(data.values(f) for f in num_fields)
        den = sum(data.values(f) for f in den_fields)
        inputs_present = ~np.isnan(num) & ~np.isnan(den)
        zero_den = inputs_present & (den == 0.0)
        neg_den = inputs_present & (den < 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = num / den
        vals = np.where(zero_den, np.nan, vals)
        nonfinite = inputs_present & ~zero_den & ~np.isfinite(vals)
        vals = np.where(np.isfinite(vals), vals, np.nan)
        if not np.any(~np.isnan(vals)):
            raise DegenerateInputError(f"ratio {ratio!r} has no computable cells")
        out[ratio] = vals
        report.rows.append(
            {
                "ratio": ratio,
                "cells_total": int(vals.size),
                "cells_present": int(np.sum(~np.isnan(vals))),
                "zero_denominator_masked": int(np.sum(zero_den)),
                "negative_denominator_flagged": int(np.sum(neg_den)),
                "nonfinite_masked": int(np.sum(nonfinite)),
            }
        )
    derived = PanelDataset(data.entities, data.timeline, data.frequency, out)
    return derived, report


# -- transformations -------------------------------------------------------

def first_difference(data: PanelDataset, variables: Sequence[str]) -> PanelDataset:
    """Replace the named variables with within-entity first differences.

    The first period is absent by construction, and a masked predecessor
    masks the difference; differences never span gaps. Other variables
    pass through unchanged.
    """
    new: dict[str, np.ndarray] = {}
    for name in variables:
        v = data.values(name)
        d = np.full_like(v, np.nan)
        d[:, 1:] = v[:, 1:] - v[:, :-1]  # NaN predecessor propagates
        new[name] = d
    return data.with_variables(new)


def add_lags(data: PanelDataset, variables: Sequence[str], lags: int) -> PanelDataset:
    """Add within-entity lagged copies named ``{variable}_l{k}``."""
    if lags < 1:
        raise ValueError("lags must be >= 1")
    new: dict[str, np.ndarray] = {}
    for name in variables:
        v = data.values(name)
        for k in range(1, lags + 1):
            lagged = np.full_like(v, np.nan)
            lagged[:, k:] = v[:, :-k]
            new[f"{name}_l{k}"] = lagged
    return data.with_variables(new)


def to_quarterly(data: PanelDataset, how: str = "mean") -> PanelDataset:
    """Aggregate a monthly panel to quarterly frequency.

    ``how`` is ``"mean"`` (within-quarter average) or ``"last"`` (third
    month). A quarter is absent unless all three months are present.
    """
    if data.frequency != MONTHLY:
        raise ValueError("to_quarterly expects a monthly panel")
    if how not in ("mean", "last"):
        raise ValueError(f"unknown aggregation {how!r}")
    # trim to whole quarters
    months = data.timeline
    start = 0
    while start < len(months) and (months[start].index - 1) % 3 != 0:
        start += 1
    end = len(months)
    while end > start and months[end - 1].index % 3 != 0:
        end -= 1
    if end - start < 3:
        raise InsufficientDataError("monthly panel does not cover a whole quarter")
    q_first = Period(months[start].year, (months[start].index - 1) // 3 + 1)
    q_last = Period(months[end - 1].year, (months[end - 1].index - 1) // 3 + 1)
    q_timeline = period_range(q_first, q_last, QUARTERLY)
    out: dict[str, np.ndarray] = {}
    for name in data.variables:
        v = data.values(name)[:, start:end]
        blocks = v.reshape(data.n_entities, len(q_timeline), 3)
        if how == "mean":
            agg = blocks.mean(axis=2)  # NaN if any month absent
        else:
            agg = blocks[:, :, 2]
            agg = np.where(np.any(np.isnan(blocks), axis=2), np.nan, agg)
        out[name] = agg
    return PanelDataset(data.entities, q_timeline, QUARTERLY, out)


# -- descriptive statistics -------------------------------------------------

@dataclass
class SummaryStats:
    variable: str
    n: int
    mean: float
    median: float
    sd: float
    minimum: float
    maximum: float

    def to_json_record(self) -> dict:
        return {
            "variable": self.variable,
            "n": self.n,
            "mean": self.mean,
            "median": self.median,
            "sd": self.sd,
            "min": self.minimum,
            "max": self.maximum,
        }


def summary_statistics(data: PanelDataset, variable: str) -> SummaryStats:
    """Pooled moments over all present (entity, period) cells."""
    v = data.values(variable)
    x = v[~np.isnan(v)]
    if x.size < 2:
        raise InsufficientDataError(
            f"variable {variable!r} has {x.size} present cells; need at least 2"
        )
    return SummaryStats(
        variable=variable,
        n=int(x.size),
        mean=float(np.mean(x)),
        median=float(np.median(x)),
        sd=float(np.std(x, ddof=1)),
        minimum=float(np.min(x)),
        maximum=float(np.max(x)),
    )


@dataclass
class VifResult:
    variable: str
    vif: float | None
    singular: bool
    r_squared: float

    def to_json_record(self) -> dict:
        return {
            "variable": self.variable,
            "vif": self.vif,
            "singular": self.singular,
            "r_squared": self.r_squared,
        }


_SINGULAR_R2 = 1.0 - 1e-10


def variance_inflation_factors(
    data: PanelDataset, variables: Sequence[str]
) -> list[VifResult]:
    """Pooled VIF per variable from complete cases across the set.

    Each variable is regressed on the others plus an intercept; VIF_j =
    1/(1 - R^2_j). Near-perfect fits (R^2 >= 1 - 1e-10) are reported as
    singular with no numeric VIF.
    """
    if len(variables) < 2:
        raise ValueError("need at least two variables for VIF")
    cols = [data.values(v).ravel() for v in variables]
    X = np.column_stack(cols)
    complete = ~np.any(np.isnan(X), axis=1)
    X = X[complete]
    n, k = X.shape
    if n < k:
        raise RankDeficiencyError(
            f"only {n} complete cases for {k} variables", column=None
        )
    results: list[VifResult] = []
    ones = np.ones((n, 1))
    for j, name in enumerate(variables):
        yj = X[:, j]
        others = np.delete(X, j, axis=1)
        Z = np.hstack([ones, others])
        coef, _, _, _ = np.linalg.lstsq(Z, yj, rcond=None)
        resid = yj - Z @ coef
        sst = float(np.sum((yj - yj.mean()) ** 2))
        if sst == 0.0:
            # constant column is collinear with the intercept
            results.append(VifResult(name, None, True, 1.0))
            continue
        r2 = 1.0 - float(np.sum(resid**2)) / sst
        r2 = min(max(r2, 0.0), 1.0)
        if r2 >= _SINGULAR_R2:
            results.append(VifResult(name, None, True, r2))
        else:
            results.append(VifResult(name, 1.0 / (1.0 - r2), False, r2))
    return results
