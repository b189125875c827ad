import math

import pytest

from tstat.distributions import CATALOG, make_distribution
from tstat.exceptions import ValidationError
from tstat.leading_terms import default_grid, eval_Ln
from tstat.rates import (ROW_COLUMNS, build_rate_report, check_points, dkw_half_width, magnitude_band,
                         nonstudentized_report, split_report, three_point_equivalence)
from tstat.simulation import exact_T_distribution


def test_dkw_half_width():
    assert dkw_half_width(10 ** 5) == pytest.approx(0.00617, abs=1e-5)
    assert dkw_half_width(4 * 10 ** 5) == pytest.approx(dkw_half_width(10 ** 5) / 2)


def test_three_point_set_validation():
    assert check_points(2.0, 0.0) == (2.0, 0.0)
    with pytest.raises(ValidationError) as err:
        check_points(1.5, 0.0)
    assert err.value.field == 'x0'
    with pytest.raises(ValidationError) as err:
        check_points(2.0, -2.0)
    assert err.value.field == 'x1'


def test_exact_report_rows(rademacher, small_grid):
    report = build_rate_report(rademacher, [8, 6], 1000, seed=1, x0=2.0, x1=0.0, grid=small_grid)
    frame = report.to_frame()
    assert list(frame.columns) == ROW_COLUMNS
    assert list(frame['n']) == [6, 8]
    for row in report.rows:
        assert row['source'] == 'exact_enumeration'
        assert row['mc_stderr_band'] == 0.0
        assert 0.0 <= row['ratio_3pt'] <= 1.0
        assert row['sup_corrected'] <= row['sup_plain'] + row['sup_Ln'] + 1e-15
        assert row['delta_n'] == pytest.approx(1 / row['n'])
        assert row['two_point_sup_plain'] <= row['sup_plain']


def test_monte_carlo_report_rows(small_grid):
    dist = make_distribution('uniform')
    report = build_rate_report(dist, [20], 5000, seed=3, grid=small_grid)
    row = report.rows[0]
    assert row['source'] == 'monte_carlo'
    assert row['mc_stderr_band'] == pytest.approx(dkw_half_width(5000))
    assert math.isfinite(row['ratio_25']) and row['ratio_25'] > 0


def test_report_rejects_bad_points(rademacher):
    with pytest.raises(ValidationError):
        build_rate_report(rademacher, [6], 100, seed=1, x0=1.0)


def test_symmetric_law_has_odd_leading_term(rademacher):
    grid = default_grid(-6, 6, 0.05, extra=(-2.0, 2.0, 0.0))
    ln = eval_Ln(rademacher, 10 ** 4, grid)
    assert ln.value_at(-2.0) == pytest.approx(-ln.value_at(2.0), abs=1e-12)
    report = build_rate_report(rademacher, [10], 100, seed=1, grid=grid)
    row = report.rows[0]
    assert row['three_point_sup'] >= abs(eval_Ln(rademacher, 10, [0.0]).values[0])


def test_three_point_ratio_is_one_at_the_argmax(exponential, small_grid):
    ln = eval_Ln(exponential, 1000, small_grid)
    x1 = ln.argmax_abs()
    if x1 in (-2.0, 2.0):
        x1 = 0.0
    ratios = three_point_equivalence(exponential, [1000], x0=2.0, x1=x1, grid=small_grid)
    assert ratios[0] == pytest.approx(1.0, abs=1e-12)


def test_three_point_ratio_rademacher(rademacher, small_grid):
    ratios = three_point_equivalence(rademacher, [10 ** 4], x0=2.0, x1=0.0, grid=small_grid)
    assert 0.0 < ratios[0] <= 1.0


@pytest.mark.parametrize('n', [6, 8, 10, 12, 14])
@pytest.mark.parametrize('name', ['rademacher', 'three_point'])
def test_triangle_bound_on_exact_laws(name, n):
    dist = make_distribution(name)
    report = build_rate_report(dist, [n], 1, seed=1)
    row = report.rows[0]
    assert row['source'] == 'exact_enumeration'
    assert row['sup_corrected'] <= row['sup_plain'] + row['sup_Ln']


@pytest.mark.parametrize('n', [6, 8, 10, 12, 14])
def test_correction_helps_three_point(n):
    row = build_rate_report(make_distribution('three_point'), [n], 1, seed=1).rows[0]
    assert row['source'] == 'exact_enumeration'
    assert row['sup_corrected'] < row['sup_plain']


@pytest.mark.parametrize('n', [6, 8, 10, 12, 14])
def test_rademacher_ties_at_the_atom_at_zero(rademacher, n):
    # T has an atom at 0 where L_n vanishes; both sups are the gap there
    row = build_rate_report(rademacher, [n], 1, seed=1).rows[0]
    gap = abs(exact_T_distribution(rademacher, n).cdf(0.0) - 0.5)
    assert row['sup_plain'] == pytest.approx(gap, abs=1e-12)
    assert row['sup_corrected'] == pytest.approx(gap, abs=1e-12)


def test_nonstudentized_rademacher_binomial(rademacher):
    for n in (100, 1000):
        report = nonstudentized_report(rademacher, [n], 1, seed=1)
        row = report.rows[0]
        assert report.correction == 'L_n1'
        assert row['source'] == 'exact_enumeration'
        assert row['sup_corrected'] <= row['sup_plain'] + 1e-12


def test_nonstudentized_normalizations_agree_for_rademacher(rademacher, small_grid):
    a = nonstudentized_report(rademacher, [100], 1, seed=1, normalization='b_n', grid=small_grid)
    b = nonstudentized_report(rademacher, [100], 1, seed=1, normalization='sqrt_n_sigma_n', grid=small_grid)
    assert b.correction == 'L_n2'
    for key in ('sup_plain', 'sup_corrected', 'sup_Ln'):
        assert a.rows[0][key] == pytest.approx(b.rows[0][key], abs=1e-14)


def test_magnitude_band_rademacher(rademacher, small_grid):
    band = magnitude_band(rademacher, [100, 1000, 10000], small_grid)
    assert set(band['ratios']) == {100, 1000, 10000}
    assert band['spread'] <= 10
    assert band['min'] > 0


def test_split_report_fields(exponential, small_grid):
    result = split_report(exponential, 50, 0.25, 4000, seed=2, grid=small_grid)
    for key in ('rho_n', 'delta_n', 'sup_truncation_gap', 'sup_split_gap', 'sup_Mn1', 'mc_stderr_band'):
        assert math.isfinite(result[key])
    assert 0.0 <= result['sup_truncation_gap'] <= 1.0
    assert result['rho_n'] > 0


def test_summary(rademacher, small_grid):
    report = build_rate_report(rademacher, [6, 8, 10], 1, seed=1, grid=small_grid)
    summary = report.summary()
    assert summary['rows'] == 3
    assert summary['min_ratio_3pt'] <= summary['max_ratio_3pt']
    assert summary['min_ratio_25'] > 0


@pytest.mark.slow
def test_correction_helps_for_exponential():
    dist = make_distribution('centered_exponential')
    report = build_rate_report(dist, [100], 10 ** 6, seed=20240101)
    row = report.rows[0]
    assert row["sup_corrected"] < row["sup_plain"]


@pytest.mark.slow
def test_nonstudentized_exponential():
    dist = make_distribution('centered_exponential')
    report = nonstudentized_report(dist, [100], 10 ** 6, seed=20240101)
    row = report.rows[0]
    assert row['sup_corrected'] < row['sup_plain']


@pytest.mark.slow
@pytest.mark.parametrize('name', CATALOG.names())
def test_magnitude_band_across_n(name):
    band = magnitude_band(make_distribution(name), [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5])
    assert band['spread'] <= 10


@pytest.mark.slow
def test_three_point_characterization_across_suite():
    lowest = math.inf
    for dist in CATALOG:
        ratios = three_point_equivalence(dist, [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5], x0=2.0, x1=0.0)
        assert ratios[-1] >= 0.5 * ratios[0]
        lowest = min(lowest, min(ratios))
    assert lowest > 0


@pytest.mark.slow
def test_rate_band_for_exponential():
    dist = make_distribution('centered_exponential')
    report = build_rate_report(dist, [50, 200, 800], 10 ** 6, seed=20240101)
    ratios = report.column('ratio_25')
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) / min(ratios) <= 10
