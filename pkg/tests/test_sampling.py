"""Conditioned-path samplers: determinism, consistency, failure modes."""

import math

import numpy as np
import pytest

from conewalk import (
    exact_tail,
    octant,
    pinched_cone_3d,
    quarter_plane,
    rejection_sample,
    splitting_sample,
    srw2d,
    srw3d,
)
from conewalk.sampling import (
    LevelExtinctionError,
    NormalizedPath,
    RejectionFloorError,
    default_schedule,
    path_functionals,
)


def test_rejection_paths_stay_in_the_cone():
    cone = quarter_plane()
    ens = rejection_sample(srw2d(), cone, 60, count=100, seed=1)
    assert len(ens.paths) == 100
    scale = ens.sigma * math.sqrt(ens.n)
    for path in ens.paths:
        lattice = np.rint(path.values * scale).astype(np.int64)
        assert (lattice[0] == 0).all()
        assert cone.contains_many(lattice[1:]).all()


def test_rejection_estimate_agrees_with_exact_tail():
    exact = exact_tail(srw2d(), quarter_plane(), 30).value(30)
    ens = rejection_sample(srw2d(), quarter_plane(), 30, count=500, seed=2)
    z = abs(ens.tail_estimate - exact) / ens.tail_stderr
    assert z < 4.0
    assert ens.method == "rejection"
    assert ens.ess == 500
    assert ens.attempts >= 500


def test_rejection_is_deterministic_across_threads():
    kwargs = dict(n=40, count=64, seed=9)
    a = rejection_sample(srw2d(), quarter_plane(), threads=1, **kwargs)
    b = rejection_sample(srw2d(), quarter_plane(), threads=4, **kwargs)
    assert a.tail_estimate == b.tail_estimate
    assert a.attempts == b.attempts
    for pa, pb in zip(a.paths, b.paths):
        assert (pa.values == pb.values).all()


def test_rejection_seeds_are_independent():
    a = rejection_sample(srw2d(), quarter_plane(), 40, count=32, seed=1)
    b = rejection_sample(srw2d(), quarter_plane(), 40, count=32, seed=2)
    assert any((pa.values != pb.values).any() for pa, pb in zip(a.paths, b.paths))


def test_rejection_floor_raises():
    # survival by n = 15 in the pinched cone is 3^-15, far below the floor
    with pytest.raises(RejectionFloorError):
        rejection_sample(srw3d(), pinched_cone_3d(), 15, count=10, seed=0,
                         floor=1e-6, floor_attempts=100_000)


def test_splitting_estimate_brackets_exact_value():
    series = exact_tail(srw2d(), octant(), 100, truncation=1e-16)
    mid = 0.5 * (series.value(100) + series.upper(100))
    ens = splitting_sample(srw2d(), octant(), 100, population=5000, seed=0)
    z = abs(ens.tail_estimate - mid) / ens.tail_stderr
    assert z < 4.0
    assert ens.method == "splitting"
    assert 0 < ens.ess <= 5000


def test_splitting_is_deterministic_across_threads():
    a = splitting_sample(srw2d(), octant(), 80, population=2000, seed=4, threads=1)
    b = splitting_sample(srw2d(), octant(), 80, population=2000, seed=4, threads=4)
    assert a.tail_estimate == b.tail_estimate
    assert len(a.paths) == len(b.paths)
    for pa, pb in zip(a.paths, b.paths):
        assert (pa.values == pb.values).all()


def test_splitting_levels_are_consistent():
    ens = splitting_sample(srw2d(), octant(), 64, population=1000, seed=6)
    checkpoints = [lv.checkpoint for lv in ens.levels]
    assert checkpoints == default_schedule(64)
    assert checkpoints[-1] == 64
    product = 1.0
    for lv in ens.levels:
        assert 0.0 < lv.fraction <= 1.0
        assert lv.survivors > 0
        product *= lv.fraction
    assert ens.tail_estimate == pytest.approx(product, rel=1e-12)


def test_splitting_paths_stay_in_the_cone():
    cone = octant()
    ens = splitting_sample(srw2d(), cone, 80, population=1500, seed=10)
    scale = ens.sigma * math.sqrt(ens.n)
    for path in ens.paths[:50]:
        lattice = np.rint(path.values * scale).astype(np.int64)
        assert cone.contains_many(lattice[1:]).all()


def test_splitting_extinction_raises():
    # population 100 cannot push through 3^-k level fractions for long
    with pytest.raises(LevelExtinctionError):
        splitting_sample(srw3d(), pinched_cone_3d(), 60, population=100, seed=0)


def test_splitting_population_floor():
    with pytest.raises(ValueError):
        splitting_sample(srw2d(), octant(), 50, population=50, seed=0)


def test_splitting_schedule_validation():
    with pytest.raises(ValueError):
        splitting_sample(srw2d(), octant(), 50, population=500, seed=0,
                         schedule=[10, 10, 50])
    with pytest.raises(ValueError):
        splitting_sample(srw2d(), octant(), 50, population=500, seed=0,
                         schedule=[10, 20])  # must end at n


def test_default_schedule_shape():
    for n in (2, 17, 100, 513):
        sched = default_schedule(n)
        assert sched[-1] == n
        assert all(b > a for a, b in zip(sched, sched[1:]))
        assert len(sched) == max(1, math.ceil(math.log2(n)))


def test_normalized_path_interpolation():
    values = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    path = NormalizedPath(values, n=2, sigma=1.0)
    assert path.at(0.0) == pytest.approx([0.0, 0.0])
    assert path.at(0.25) == pytest.approx([0.5, 0.0])
    assert path.at(1.0) == pytest.approx([1.0, 1.0])
    assert path.endpoint == pytest.approx([1.0, 1.0])
    assert path.sup_norm() == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ValueError):
        path.at(1.5)


def test_path_functionals_keys_and_shapes():
    ens = rejection_sample(srw2d(), quarter_plane(), 30, count=40, seed=3)
    fns = path_functionals(ens, eps=0.05)
    assert set(fns) == {"endpoint", "endpoint_norm", "sup_norm",
                        "boundary_fraction"}
    assert fns["endpoint"].shape == (40, 2)
    assert (fns["endpoint_norm"] >= 0).all()
    assert (fns["boundary_fraction"] >= 0).all()
    assert (fns["boundary_fraction"] <= 1).all()


def test_pinched_ensemble_lives_on_the_axis():
    # survival in {0 <= x/2 <= y <= 2x} kills every x and y move from the
    # origin, so conditioned paths are simple walks along the z axis
    ens = splitting_sample(srw3d(), pinched_cone_3d(), 20, population=500, seed=3)
    scale = ens.sigma * math.sqrt(ens.n)
    for path in ens.paths[:20]:
        lattice = np.rint(path.values * scale).astype(np.int64)
        assert (lattice[:, 0] == 0).all()
        assert (lattice[:, 1] == 0).all()
        assert np.abs(np.diff(lattice[:, 2])).max() == 1
