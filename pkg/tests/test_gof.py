"""Goodness-of-fit statistics: KS machinery, binned distances, boundary time."""

import math

import numpy as np
import pytest

from conewalk import (
    MeanderEndpointLaw,
    boundary_occupation,
    child_rng,
    endpoint_gof,
    endpoint_law,
    half_line,
    ks_critical,
    ks_one_sample,
    ks_two_sample,
    pinched_cone_3d,
    quarter_plane,
    rayleigh_cdf,
    rayleigh_check,
    rejection_sample,
    splitting_sample,
    srw1d,
    srw2d,
    srw3d,
)
from conewalk.gof import _binned_distance


def test_ks_critical_constant():
    # c(level) = sqrt(-ln(level / 2) / 2); at 1% this is about 1.6276
    assert ks_critical(0.01) == pytest.approx(1.6276236307187293, rel=1e-12)
    assert ks_critical(0.05) == pytest.approx(1.3581015157406195, rel=1e-12)


def test_ks_one_sample_on_exact_uniforms():
    u = (np.arange(1000) + 0.5) / 1000.0
    report = ks_one_sample(u, lambda x: np.clip(x, 0.0, 1.0), level=0.01)
    assert report.statistic <= 0.5 / 1000.0 + 1e-12
    assert report.passed


def test_ks_statistic_range_and_transform_invariance():
    rng = child_rng(3, 0)
    x = rng.normal(size=400) ** 2 + 0.1

    def cdf(v):
        v = np.asarray(v, dtype=np.float64)
        return np.where(v > 0.1, 1.0 - np.exp(-(v - 0.1)), 0.0)

    base = ks_one_sample(x, cdf)
    # strictly increasing transform applied to both samples and CDF argument
    transformed = ks_one_sample(np.exp(x), lambda v: cdf(np.log(v)))
    assert 0.0 <= base.statistic <= 1.0
    assert transformed.statistic == pytest.approx(base.statistic, rel=1e-12)


def test_ks_one_sample_rejects_nan():
    with pytest.raises(ValueError):
        ks_one_sample(np.array([0.1, np.nan]), rayleigh_cdf)


def test_ks_one_sample_ess_scales_threshold():
    samples = child_rng(4, 0).rayleigh(size=256)
    full = ks_one_sample(samples, rayleigh_cdf, level=0.01)
    weak = ks_one_sample(samples, rayleigh_cdf, level=0.01, ess=16.0)
    assert weak.threshold == pytest.approx(full.threshold * 4.0)
    assert weak.sample_size == 16.0


def test_ks_two_sample_same_law_passes():
    rng = child_rng(6, 0)
    a = rng.rayleigh(size=3000)
    b = rng.rayleigh(size=2000)
    report = ks_two_sample(a, b, level=0.01)
    assert report.passed
    assert report.sample_size == pytest.approx(3000 * 2000 / 5000)


def test_ks_two_sample_detects_shift():
    rng = child_rng(6, 1)
    a = rng.rayleigh(size=3000)
    b = rng.rayleigh(size=3000) + 0.5
    assert not ks_two_sample(a, b, level=0.01).passed


def test_rayleigh_samples_pass_rayleigh_check():
    samples = child_rng(12, 0).rayleigh(size=50_000)
    report = rayleigh_check(samples)
    assert report.passed


def test_meander_samples_pass_their_own_law():
    law = MeanderEndpointLaw(1.0)
    r, theta = law.sample(child_rng(13, 0), 30_000)
    radial, angular = endpoint_gof((r, theta), law)
    assert radial.passed and angular.passed


def test_binned_distance_refinement_plateau():
    # once bins are finer than one lattice atom, cdf_sup stops changing
    law = endpoint_law(srw1d(), half_line(), 40)
    values = law.normalized_points()[:, 0]
    spacing = np.diff(np.sort(values)).min()
    coarse = _binned_distance(values, law.mass, rayleigh_cdf, spacing * 0.9)
    fine = _binned_distance(values, law.mass, rayleigh_cdf, spacing * 0.45)
    finer = _binned_distance(values, law.mass, rayleigh_cdf, spacing * 0.2)
    assert fine == coarse
    assert finer == coarse


def test_binned_tv_statistic_differs_from_cdf_sup():
    law = endpoint_law(srw1d(), half_line(), 100)
    sup = rayleigh_check(law, statistic="cdf_sup").statistic
    tv = rayleigh_check(law, statistic="tv").statistic
    assert 0.0 < sup <= 1.0
    assert 0.0 < tv <= 2.0
    assert abs(tv - sup) > 1e-3
    with pytest.raises(ValueError):
        rayleigh_check(law, statistic="hellinger")


def test_exact_law_reports_use_mass_map_metadata():
    law = endpoint_law(srw2d(), quarter_plane(), 100)
    radial, angular = endpoint_gof(law, MeanderEndpointLaw(1.0))
    assert radial.name == "radial_binned_tv"
    assert radial.threshold == 0.05
    assert angular.statistic <= 2.0
    sup_radial, _ = endpoint_gof(law, MeanderEndpointLaw(1.0), statistic="cdf_sup")
    assert sup_radial.name == "radial_binned_cdf_sup"
    assert sup_radial.statistic < radial.statistic


def test_rayleigh_check_rejects_2d_input():
    law = endpoint_law(srw2d(), quarter_plane(), 20)
    with pytest.raises(ValueError):
        rayleigh_check(law)


def test_boundary_occupation_pinched_is_total():
    ens = splitting_sample(srw3d(), pinched_cone_3d(), 20, population=300, seed=3)
    report = boundary_occupation(ens, 0.0)
    assert report.mean_fraction == 1.0
    assert all(f == 1.0 for f in report.per_path)


def test_boundary_occupation_monotone_in_eps():
    ens = rejection_sample(srw2d(), quarter_plane(), 60, count=80, seed=21)
    fractions = [boundary_occupation(ens, eps).mean_fraction
                 for eps in (0.0, 0.05, 0.15, 0.5)]
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))
    with pytest.raises(ValueError):
        boundary_occupation(ens, -0.1)


def test_boundary_occupation_eps_zero_counts_exact_hits():
    ens = rejection_sample(srw2d(), quarter_plane(), 20, count=50, seed=22)
    report = boundary_occupation(ens, 0.0)
    scale = ens.sigma * math.sqrt(ens.n)
    want = []
    for path in ens.paths:
        lattice = np.rint(path.values * scale).astype(np.int64)
        hits = ((lattice[:, 0] == 0) | (lattice[:, 1] == 0)).mean()
        want.append(hits)
    assert report.per_path == pytest.approx(want)
