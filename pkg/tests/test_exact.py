"""Exact survival engine: hand anchors, enumeration oracles, brackets."""

import math
from fractions import Fraction

import numpy as np
import pytest

from conewalk import (
    HalfSpaceIntersection,
    compensated_sum,
    endpoint_law,
    exact_tail,
    half_line,
    octant,
    pinched_cone_3d,
    pinched_half_cone_3d,
    quarter_plane,
    sandwich_check,
    srw1d,
    srw2d,
    srw3d,
    survival_from,
    two_step_srw2d,
)
from conewalk.walks import DiskStep

import oracles


def test_quarter_plane_hand_values():
    # n=1: only (1,0) and (0,1) of four steps stay in; n=2: 6 of 16 paths; ...
    series = exact_tail(srw2d(), quarter_plane(), 3)
    assert series.value(0) == 1.0
    assert series.value(1) == pytest.approx(0.5, rel=1e-15)
    assert series.value(2) == pytest.approx(0.375, rel=1e-15)
    assert series.value(3) == pytest.approx(0.28125, rel=1e-15)


def test_halfline_hand_values():
    # ballot-style counts: p(1)=1/2, p(2)=1/4? no: (+,-) lands on 0 which stays
    series = exact_tail(srw1d(), half_line(), 4)
    expected = oracles.tail_by_state_enumeration(srw1d(), half_line(), 4)
    for n in range(5):
        assert series.value(n) == pytest.approx(float(expected[n]), rel=1e-14)


@pytest.mark.parametrize("dist,cone", [
    (srw1d(), half_line()),
    (srw2d(), quarter_plane()),
    (srw2d(), octant()),
    (two_step_srw2d(), quarter_plane()),
    (srw3d(), pinched_cone_3d()),
    (srw3d(), pinched_half_cone_3d()),
])
def test_tail_matches_exact_enumeration(dist, cone):
    series = exact_tail(dist, cone, 10)
    expected = oracles.tail_by_state_enumeration(dist, cone, 10)
    for n in range(11):
        want = float(expected[n])
        assert series.value(n) == pytest.approx(want, rel=1e-13)


def test_state_oracle_agrees_with_literal_path_enumeration():
    # the aggregated oracle itself is validated against walking every path
    lit = oracles.tail_by_path_enumeration(srw2d(), quarter_plane(), 8)
    agg = oracles.tail_by_state_enumeration(srw2d(), quarter_plane(), 8)[8]
    assert lit == agg  # exact rational equality


def test_degenerate_cone_gives_powers_of_one_third():
    series = exact_tail(srw3d(), pinched_cone_3d(), 30)
    for n in range(31):
        assert series.value(n) == pytest.approx(3.0 ** -n, rel=1e-12)


def test_tails_are_monotone_nonincreasing():
    for dist, cone in ((srw2d(), quarter_plane()), (srw2d(), octant())):
        series = exact_tail(dist, cone, 120)
        values = series.values
        assert (np.diff(values) <= 1e-18).all()
        assert values[0] == 1.0


def test_endpoint_law_matches_enumeration():
    law = endpoint_law(srw2d(), quarter_plane(), 8)
    want = oracles.endpoint_law_by_enumeration(srw2d(), quarter_plane(), 8)
    got = {tuple(int(c) for c in p): m for p, m in zip(law.points, law.mass)}
    assert got.keys() == want.keys()
    for key, frac in want.items():
        assert got[key] == pytest.approx(float(frac), rel=1e-13)
    assert law.mass.sum() == pytest.approx(1.0, abs=1e-12)


def test_endpoint_law_two_step_hand_case():
    # one step of the two-step walk from the origin in the quarter plane:
    # surviving atoms (0,0) 4/16, (2,0) 1/16, (0,2) 1/16, (1,1) 2/16
    law = endpoint_law(two_step_srw2d(), quarter_plane(), 1)
    got = {tuple(int(c) for c in p): m for p, m in zip(law.points, law.mass)}
    assert got == pytest.approx({(0, 0): 0.5, (2, 0): 0.125,
                                 (0, 2): 0.125, (1, 1): 0.25})


def test_truncated_bracket_contains_exact_value():
    exact = exact_tail(srw2d(), octant(), 200)
    trunc = exact_tail(srw2d(), octant(), 200, truncation=1e-12)
    for n in (50, 100, 200):
        lo, hi = trunc.value(n), trunc.upper(n)
        assert lo <= exact.value(n) <= hi
        assert trunc.provenance == "truncated"
    assert exact.rel_gap is None or np.all(np.asarray(exact.rel_gap) == 0.0)


def test_truncation_speeds_and_tightness():
    trunc = exact_tail(srw2d(), octant(), 300, truncation=1e-16)
    assert trunc.rel_gap[300] < 1e-10
    assert trunc.upper(300) / trunc.value(300) - 1.0 == pytest.approx(
        trunc.rel_gap[300])


def test_survival_from_interior_start_is_one_for_short_horizon():
    # 4 bounded steps cannot reach the boundary from (10, 10)
    assert survival_from(srw2d(), quarter_plane(), (10, 10), 4) == 1.0
    # from (1, 1): all 4 first steps survive, then 4+3+4+3 of the 16
    # two-step continuations stay in the quadrant
    p = survival_from(srw2d(), quarter_plane(), (1, 1), 2)
    assert p == pytest.approx(14.0 / 16.0, rel=1e-14)


def test_survival_from_rejects_outside_start():
    with pytest.raises(ValueError):
        survival_from(srw2d(), quarter_plane(), (-1, 0), 3)


def test_exact_tail_rejects_unadapted_cone():
    empty = HalfSpaceIntersection([(-2, 1), (3, -1)])  # holds no srw2d atom
    with pytest.raises(ValueError):
        exact_tail(srw2d(), empty, 5)


def test_exact_tail_rejects_continuous_walks():
    with pytest.raises(TypeError):
        exact_tail(DiskStep(), quarter_plane(), 5)


def test_exact_tail_zero_horizon():
    series = exact_tail(srw2d(), quarter_plane(), 0)
    assert series.n_max == 0
    assert series.value(0) == 1.0


def test_row_budget_is_enforced():
    with pytest.raises(RuntimeError):
        exact_tail(srw2d(), quarter_plane(), 200, max_rows=1000)


def test_long_horizon_stays_in_log_space():
    # 3^-700 underflows doubles; the log series must stay finite and linear
    series = exact_tail(srw3d(), pinched_cone_3d(), 800)
    logs = series.log_values
    assert np.isfinite(logs).all()
    assert logs[800] == pytest.approx(-800.0 * math.log(3.0), rel=1e-12)
    assert series.values[800] == 0.0  # flushed to zero only on demand


def test_sandwich_brackets_hold_on_the_octant():
    report = sandwich_check(octant(), 60)
    assert report.lower_holds and report.upper_holds
    assert report.lower <= report.tail_value <= report.upper
    assert report.alpha > 0.0
    assert octant().distance_to_boundary(np.asarray(report.anchor, float)) > 1.0
    assert report.m == (report.n - report.k) // 2 + 1


def test_compensated_sum_beats_naive_addition():
    parts = np.array([1.0] + [1e-16] * 10_000)
    assert compensated_sum(parts) == pytest.approx(math.fsum(parts), rel=0.0,
                                                   abs=5e-17)
    rng = np.random.default_rng(31)
    noise = rng.normal(size=10_001) * 1e-3
    assert compensated_sum(noise) == pytest.approx(math.fsum(noise), abs=1e-15)


def test_mass_map_normalization_helpers():
    law = endpoint_law(srw2d(), quarter_plane(), 50)
    scaled = law.normalized_points()
    radii = law.normalized_radii()
    assert scaled.shape == law.points.shape
    assert radii == pytest.approx(np.linalg.norm(scaled, axis=1))
    sigma_sqrt_n = law.sigma * math.sqrt(50)
    assert scaled * sigma_sqrt_n == pytest.approx(law.points.astype(float))
