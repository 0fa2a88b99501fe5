"""Shared builders for the test suite.

Panels are built in-memory; CSV fixtures are written per-test into tmp_path
so nothing leaks between tests. Seeds are fixed constants, never wall-clock.
"""

import numpy as np
import pytest

from panelmix.panel import PanelDataset, parse_period, period_range


def make_panel(
    entities, first_stamp, frequency, variables, n_periods=None
) -> PanelDataset:
    """Rectangular panel from {name: (n_entities, n_periods) array-like}."""
    arrays = {k: np.asarray(v, dtype=float) for k, v in variables.items()}
    any_arr = next(iter(arrays.values()))
    if n_periods is None:
        n_periods = any_arr.shape[1]
    first = parse_period(first_stamp, frequency)
    timeline = _advance_range(first, n_periods, frequency)
    return PanelDataset(tuple(entities), timeline, frequency, arrays)


def _advance_range(first, n_periods, frequency):
    from panelmix.panel import period_after

    out = [first]
    for _ in range(n_periods - 1):
        out.append(period_after(out[-1], frequency))
    return tuple(out)


def single_entity_panel(values, first_stamp="1990Q1", frequency="quarterly", name="y"):
    v = np.asarray(values, dtype=float).reshape(1, -1)
    return make_panel(["e1"], first_stamp, frequency, {name: v})


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
