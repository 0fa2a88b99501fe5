"""Panel container, CSV loader, ratio derivation, transforms, summaries."""

import numpy as np
import pytest

from panelmix.errors import (
    DegenerateInputError,
    InsufficientDataError,
    IntegrityError,
    PeriodParseError,
)
from panelmix.panel import (
    CsvSchema,
    PanelDataset,
    add_lags,
    derive_financial_ratios,
    first_difference,
    format_period,
    load_panel_csv,
    parse_period,
    period_range,
    summary_statistics,
    to_quarterly,
    variance_inflation_factors,
    write_panel_csv,
)
from tests.conftest import make_panel, single_entity_panel


# -- period stamps ----------------------------------------------------------

def test_quarterly_stamp_round_trip():
    p = parse_period("1990Q1", "quarterly")
    assert (p.year, p.index) == (1990, 1)
    assert format_period(p, "quarterly") == "1990Q1"


def test_monthly_stamp_round_trip():
    p = parse_period("2001-11", "monthly")
    assert (p.year, p.index) == (2001, 11)
    assert format_period(p, "monthly") == "2001-11"


@pytest.mark.parametrize("bad", ["1990", "1990Q5", "1990-13", "Q1990", ""])
def test_malformed_stamps_rejected(bad):
    with pytest.raises(PeriodParseError):
        parse_period(bad, "quarterly")
    with pytest.raises(PeriodParseError):
        parse_period(bad, "monthly")


def test_period_range_crosses_year_boundary():
    first = parse_period("1999Q3", "quarterly")
    last = parse_period("2000Q2", "quarterly")
    stamps = [format_period(p, "quarterly") for p in period_range(first, last, "quarterly")]
    assert stamps == ["1999Q3", "1999Q4", "2000Q1", "2000Q2"]


# -- loader -----------------------------------------------------------------

def _write(tmp_path, text, name="panel.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_full_rectangle(tmp_path):
    path = _write(
        tmp_path,
        "entity,period,x,y\n"
        "firmA,1990Q1,1.0,10.0\n"
        "firmA,1990Q2,2.0,20.0\n"
        "firmA,1990Q3,3.0,30.0\n"
        "firmB,1990Q1,4.0,40.0\n"
        "firmB,1990Q2,5.0,50.0\n"
        "firmB,1990Q3,6.0,60.0\n",
    )
    panel = load_panel_csv(path, CsvSchema(), "quarterly")
    assert panel.entities == ("firmA", "firmB")
    assert panel.n_periods == 3
    assert panel.variables == ("x", "y")
    np.testing.assert_allclose(panel.values("x"), [[1, 2, 3], [4, 5, 6]])
    assert panel.mask("y").all()


def test_blank_cell_becomes_single_mask_hole(tmp_path):
    path = _write(
        tmp_path,
        "entity,period,x\n"
        "firmA,1990Q1,1.0\n"
        "firmA,1990Q2,\n"
        "firmA,1990Q3,3.0\n",
    )
    panel = load_panel_csv(path, CsvSchema(), "quarterly")
    mask = panel.mask("x")
    assert mask.sum() == 2
    assert not mask[0, 1]
    assert np.isnan(panel.values("x")[0, 1])


def test_duplicate_key_names_the_pair(tmp_path):
    path = _write(
        tmp_path,
        "entity,period,x\n"
        "firmA,1990Q1,1.0\n"
        "firmA,1990Q1,2.0\n",
    )
    with pytest.raises(IntegrityError) as exc:
        load_panel_csv(path, CsvSchema(), "quarterly")
    assert "firmA" in str(exc.value)
    assert "1990Q1" in str(exc.value)


def test_csv_round_trip_preserves_values_and_holes(tmp_path):
    values = np.array([[1.25, np.nan, -3.5], [0.0, 2.0, 7.125]])
    panel = make_panel(["a", "b"], "1995-01", "monthly", {"u": values})
    out = str(tmp_path / "round.csv")
    write_panel_csv(panel, out)
    back = load_panel_csv(out, CsvSchema(), "monthly")
    np.testing.assert_array_equal(back.mask("u"), ~np.isnan(values))
    np.testing.assert_allclose(
        back.values("u")[~np.isnan(values)], values[~np.isnan(values)]
    )


# -- financial ratios -------------------------------------------------------

def _balance_panel(**overrides):
    base = {
        "current_assets": [[200.0]],
        "current_liabilities": [[100.0]],
        "cash": [[50.0]],
        "cash_equivalents": [[10.0]],
        "marketable_securities": [[20.0]],
        "receivables_net": [[20.0]],
        "total_debt": [[40.0]],
        "total_assets": [[80.0]],
        "market_value_equity": [[60.0]],
        "market_value_debt": [[40.0]],
        "replacement_cost": [[100.0]],
    }
    base.update(overrides)
    return make_panel(["firmA"], "1990Q1", "quarterly", base)


def test_ratio_values_on_known_balance_sheet():
    derived, report = derive_financial_ratios(_balance_panel())
    assert derived.values("cr")[0, 0] == pytest.approx(2.0)
    assert derived.values("quick")[0, 0] == pytest.approx(1.0)
    assert derived.values("da")[0, 0] == pytest.approx(0.5)
    assert derived.values("q")[0, 0] == pytest.approx(1.0)
    assert all(r["zero_denominator_masked"] == 0 for r in report.rows)


def test_market_equals_replacement_gives_unit_q():
    derived, _ = derive_financial_ratios(
        _balance_panel(
            market_value_equity=[[75.0]],
            market_value_debt=[[25.0]],
            replacement_cost=[[100.0]],
        ),
        ratios=("q",),
    )
    assert derived.values("q")[0, 0] == pytest.approx(1.0)


def test_zero_denominator_masked_and_counted():
    panel = make_panel(
        ["firmA"],
        "1990Q1",
        "quarterly",
        {
            "current_assets": [[200.0, 150.0]],
            "current_liabilities": [[100.0, 0.0]],
        },
    )
    derived, report = derive_financial_ratios(panel, ratios=("cr",))
    assert derived.values("cr")[0, 0] == pytest.approx(2.0)
    assert np.isnan(derived.values("cr")[0, 1])
    assert report.rows[0]["zero_denominator_masked"] == 1


def test_all_masked_ratio_is_degenerate():
    panel = make_panel(
        ["firmA"],
        "1990Q1",
        "quarterly",
        {
            "current_assets": [[200.0, 150.0]],
            "current_liabilities": [[0.0, 0.0]],
        },
    )
    with pytest.raises(DegenerateInputError):
        derive_financial_ratios(panel, ratios=("cr",))


def test_missing_input_column_named():
    panel = make_panel(["firmA"], "1990Q1", "quarterly", {"current_assets": [[1.0]]})
    with pytest.raises(KeyError) as exc:
        derive_financial_ratios(panel, ratios=("cr",))
    assert "current_liabilities" in str(exc.value)


# -- transforms -------------------------------------------------------------

def test_first_difference_drops_first_and_differences():
    panel = single_entity_panel([1.0, 3.0, 6.0])
    diffed = first_difference(panel, ["y"])
    v = diffed.values("y")[0]
    assert np.isnan(v[0])
    np.testing.assert_allclose(v[1:], [2.0, 3.0])


def test_first_difference_of_constant_is_zero():
    diffed = first_difference(single_entity_panel([4.0, 4.0, 4.0, 4.0]), ["y"])
    np.testing.assert_allclose(diffed.values("y")[0, 1:], 0.0)


def test_first_difference_never_spans_gaps():
    diffed = first_difference(single_entity_panel([1.0, np.nan, 6.0]), ["y"])
    assert np.all(np.isnan(diffed.values("y")))


def test_difference_then_cumsum_reconstructs_levels(rng):
    levels = np.cumsum(rng.normal(size=(3, 20)), axis=1)
    panel = make_panel(["a", "b", "c"], "1990Q1", "quarterly", {"y": levels})
    d = first_difference(panel, ["y"]).values("y")
    rebuilt = levels[:, [0]] + np.concatenate(
        [np.zeros((3, 1)), np.cumsum(d[:, 1:], axis=1)], axis=1
    )
    np.testing.assert_allclose(rebuilt, levels, atol=1e-12)


def test_add_lags_names_and_alignment():
    panel = single_entity_panel([1.0, 2.0, 3.0, 4.0])
    lagged = add_lags(panel, ["y"], 2)
    assert "y_l1" in lagged.variables and "y_l2" in lagged.variables
    np.testing.assert_allclose(lagged.values("y_l1")[0, 1:], [1.0, 2.0, 3.0])
    assert np.isnan(lagged.values("y_l2")[0, 1])
    np.testing.assert_allclose(lagged.values("y_l2")[0, 2:], [1.0, 2.0])


def test_to_quarterly_mean_and_last(rng):
    months = rng.normal(size=(1, 6))
    panel = make_panel(["a"], "1990-01", "monthly", {"u": months})
    q_mean = to_quarterly(panel, how="mean")
    q_last = to_quarterly(panel, how="last")
    assert q_mean.frequency == "quarterly"
    np.testing.assert_allclose(
        q_mean.values("u")[0], [months[0, :3].mean(), months[0, 3:].mean()]
    )
    np.testing.assert_allclose(q_last.values("u")[0], [months[0, 2], months[0, 5]])


def test_to_quarterly_requires_all_three_months():
    months = np.array([[1.0, np.nan, 3.0, 4.0, 5.0, 6.0]])
    panel = make_panel(["a"], "1990-01", "monthly", {"u": months})
    q = to_quarterly(panel)
    assert np.isnan(q.values("u")[0, 0])
    assert q.values("u")[0, 1] == pytest.approx(5.0)


# -- summaries --------------------------------------------------------------

def test_summary_statistics_known_values():
    s = summary_statistics(single_entity_panel([1.0, 2.0, 3.0]), "y")
    assert (s.n, s.mean, s.median, s.sd, s.minimum, s.maximum) == (
        3,
        pytest.approx(2.0),
        pytest.approx(2.0),
        pytest.approx(1.0),
        pytest.approx(1.0),
        pytest.approx(3.0),
    )


def test_summary_statistics_constant_sample_sd_zero():
    s = summary_statistics(single_entity_panel([5.0, 5.0, 5.0, 5.0]), "y")
    assert s.sd == 0.0
    assert s.mean == 5.0


def test_summary_statistics_needs_two_cells():
    with pytest.raises(InsufficientDataError):
        summary_statistics(single_entity_panel([7.0]), "y")


def test_vif_orthogonal_columns_give_one(rng):
    n = 64
    a = np.tile([1.0, -1.0], n // 2)
    b = np.tile([1.0, 1.0, -1.0, -1.0], n // 4)
    panel = make_panel(
        ["e"], "1990Q1", "quarterly", {"a": a.reshape(1, -1), "b": b.reshape(1, -1)}
    )
    for res in variance_inflation_factors(panel, ["a", "b"]):
        assert not res.singular
        assert res.vif == pytest.approx(1.0, abs=1e-10)


def test_vif_exact_collinearity_flags_both(rng):
    a = rng.normal(size=(1, 40))
    panel = make_panel(["e"], "1990Q1", "quarterly", {"a": a, "b": 2.0 * a})
    results = variance_inflation_factors(panel, ["a", "b"])
    assert all(r.singular and r.vif is None for r in results)


def test_vif_matches_direct_r_squared_oracle(rng):
    a = rng.normal(size=40)
    b = a + 0.5 * rng.normal(size=40)
    panel = make_panel(
        ["e"], "1990Q1", "quarterly", {"a": a.reshape(1, -1), "b": b.reshape(1, -1)}
    )
    results = variance_inflation_factors(panel, ["a", "b"])
    # oracle: R^2 of a on (1, b) via explicit normal equations
    Z = np.column_stack([np.ones(40), b])
    coef = np.linalg.solve(Z.T @ Z, Z.T @ a)
    resid = a - Z @ coef
    r2 = 1.0 - resid @ resid / np.sum((a - a.mean()) ** 2)
    assert results[0].vif == pytest.approx(1.0 / (1.0 - r2), rel=1e-9)
    assert all(r.vif >= 1.0 for r in results)


def test_vif_needs_two_variables():
    panel = single_entity_panel([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        variance_inflation_factors(panel, ["y"])


# -- dataset views ----------------------------------------------------------

def test_with_variables_rejects_shape_mismatch():
    panel = single_entity_panel([1.0, 2.0, 3.0])
    with pytest.raises(IntegrityError):
        panel.with_variables({"z": np.zeros((2, 3))})


def test_broadcast_to_entities_copies_single_entity():
    panel = single_entity_panel([1.0, 2.0, 3.0])
    wide = panel.broadcast_to_entities(["f1", "f2", "f3"])
    assert wide.entities == ("f1", "f2", "f3")
    np.testing.assert_allclose(wide.values("y"), np.tile([1.0, 2.0, 3.0], (3, 1)))
