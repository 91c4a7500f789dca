"""Goodness-of-fit statistics for conditioned endpoint laws.

Monte Carlo ensembles are tested with Kolmogorov-Smirnov statistics whose
thresholds use the effective sample size (splitting ensembles are dependent).
Exact lattice endpoint laws are compared after binning at width 2 / sqrt(n)
in scaled units, with bins centered on multiples of the width so lattice
atoms never sit on an edge.  Two binned distances are provided: a summed
total-variation distance at the design width, and a KS-style sup distance
using the mid-distribution convention, which is exact (invariant under
further refinement) once every bin holds at most one atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cones import Wedge2D
from .exact import MassMap
from .meander import MeanderEndpointLaw, rayleigh_cdf
from .sampling import PathEnsemble

__all__ = [
    "GofReport",
    "BoundaryReport",
    "ks_critical",
    "ks_one_sample",
    "ks_two_sample",
    "endpoint_gof",
    "rayleigh_check",
    "boundary_occupation",
]


@dataclass(frozen=True)
class GofReport:
    """One statistic, its decision threshold, and the verdict."""

    name: str
    statistic: float
    threshold: float
    sample_size: float
    passed: bool
    level: float | None = None
    note: str = ""


@dataclass(frozen=True)
class BoundaryReport:
    """Time fraction spent near the cone boundary."""

    mean_fraction: float
    per_path: np.ndarray
    eps: float


def ks_critical(level: float) -> float:
    """Asymptotic Kolmogorov critical coefficient c with P(D > c / sqrt N) = level."""
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level}")
    return math.sqrt(-0.5 * math.log(level / 2.0))


def _clean_samples(samples):
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("need at least one sample")
    if np.any(np.isnan(arr)):
        raise ValueError("samples contain NaN")
    return arr


def ks_one_sample(samples, cdf, level=0.01, ess=None, name="ks") -> GofReport:
    """One-sample KS test of ``samples`` against a continuous CDF.

    ``ess`` overrides the sample count in the threshold for dependent
    ensembles.  The asymptotic threshold is reliable from a few dozen
    effective samples upward.
    """
    arr = _clean_samples(samples)
    m = arr.size
    f = np.asarray(cdf(arr), dtype=np.float64)
    grid = np.arange(1, m + 1) / m
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f - (grid - 1.0 / m)))
    stat = max(d_plus, d_minus)
    n_eff = float(m if ess is None else ess)
    threshold = ks_critical(level) / math.sqrt(n_eff)
    note = "" if n_eff >= 20 else "threshold is asymptotic; tiny sample"
    return GofReport(name, stat, threshold, n_eff, stat <= threshold, level, note)


def ks_two_sample(a, b, level=0.01, name="ks2") -> GofReport:
    """Two-sample KS test; threshold scales by the effective pooled size."""
    a = _clean_samples(a)
    b = _clean_samples(b)
    pooled = np.concatenate([a, b])
    pooled.sort(kind="stable")
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    stat = float(np.max(np.abs(fa - fb)))
    n_eff = a.size * b.size / (a.size + b.size)
    threshold = ks_critical(level) / math.sqrt(n_eff)
    return GofReport(name, stat, threshold, n_eff, stat <= threshold, level)


# -- binned comparison of exact laws ------------------------------------------


def _centered_edges(values, width):
    # Scaled lattice atoms land on multiples of the width for the built-in
    # walks, so put bin centers there; an atom exactly on an edge would be
    # assigned by float rounding.  First edge pinned to 0 (radii, angles).
    hi = float(values.max())
    count = max(int(math.ceil((hi - 0.5 * width) / width)) + 1, 1)
    return np.concatenate([[0.0], (np.arange(count) + 0.5) * width])


def _binned_distance(values, weights, cdf, width, statistic="cdf_sup"):
    """Distance between a discrete law and a continuous CDF after binning.

    cdf_sup: atoms falling in one bin merge at their mass-weighted position,
    and the statistic is the sup over occupied bins of |mid-CDF - model CDF|,
    where the mid-CDF runs through half of each merged atom's mass.  The
    mid-distribution convention cancels the jump bias a one-sided empirical
    CDF would add on atomic data.  Once every bin holds at most one atom the
    merged law is the exact law, so further refinement leaves the value
    unchanged.
    tv: sum of |bin mass - model bin mass| over the bins plus the model tail
    beyond the last edge.  Meaningful at the design width only: against a
    continuous model it grows toward 2 as bins shrink below one atom each.
    """
    edges = _centered_edges(values, width)
    emp, _ = np.histogram(values, bins=edges, weights=weights)
    if statistic == "cdf_sup":
        moment, _ = np.histogram(values, bins=edges, weights=weights * values)
        keep = emp > 0.0
        mass = emp[keep]
        positions = moment[keep] / mass
        cum = np.cumsum(mass)
        model = np.asarray(cdf(positions), dtype=np.float64)
        return float(np.max(np.abs(cum - 0.5 * mass - model)))
    if statistic == "tv":
        model_cdf = np.asarray(cdf(edges), dtype=np.float64)
        model = np.diff(model_cdf)
        return float(np.abs(emp - model).sum() + (1.0 - model_cdf[-1]))
    raise ValueError(f"unknown binned statistic {statistic!r}")


def _wedge_of(obj):
    cone = obj.cone
    if not isinstance(cone, Wedge2D):
        raise ValueError("endpoint comparison needs a planar wedge cone")
    return cone


def endpoint_gof(obj, law: MeanderEndpointLaw, level=0.01, threshold=0.05,
                 statistic=None):
    """Compare a conditioned endpoint law against the wedge meander law.

    ``obj`` may be a PathEnsemble (KS tests on radial and angular samples,
    thresholds at ``level`` using the ensemble ESS), a MassMap from the exact
    engine (binned distances at width 2 / sqrt(n) against ``threshold``), or a
    plain (radii, angles) sample pair.  Returns (radial, angular) reports.

    For exact laws the default statistic is the binned total variation, which
    vanishes as n grows; pass statistic="cdf_sup" for the KS-style sup
    distance instead.
    """
    if isinstance(obj, PathEnsemble):
        cone = _wedge_of(obj)
        pts = obj.endpoints()
        radii = np.linalg.norm(pts, axis=1)
        angles = cone.local_angle(pts)
        radial = ks_one_sample(radii, law.radial_cdf, level=level,
                               ess=obj.ess, name="radial_ks")
        angular = ks_one_sample(angles, law.angular_cdf, level=level,
                                ess=obj.ess, name="angular_ks")
        return radial, angular
    if isinstance(obj, MassMap):
        cone = _wedge_of(obj)
        stat_name = "tv" if statistic is None else statistic
        width = 2.0 / math.sqrt(obj.n)
        radii = obj.normalized_radii()
        angles = cone.local_angle(obj.points.astype(np.float64))
        # The angular CDF is only defined on [0, beta]; bin edges past beta all
        # carry CDF 1, so clip rather than extrapolate.
        ang_cdf = lambda t: law.angular_cdf(np.clip(t, 0.0, law.beta))
        d_rad = _binned_distance(radii, obj.mass, law.radial_cdf, width, stat_name)
        d_ang = _binned_distance(angles, obj.mass, ang_cdf, width, stat_name)
        note = f"binned at width {width:.6g}, statistic {stat_name}"
        radial = GofReport(f"radial_binned_{stat_name}", d_rad, threshold,
                           float(len(obj.mass)), d_rad <= threshold, None, note)
        angular = GofReport(f"angular_binned_{stat_name}", d_ang, threshold,
                            float(len(obj.mass)), d_ang <= threshold, None, note)
        return radial, angular
    radii, angles = obj
    radial = ks_one_sample(radii, law.radial_cdf, level=level, name="radial_ks")
    angular = ks_one_sample(angles, law.angular_cdf, level=level, name="angular_ks")
    return radial, angular


def rayleigh_check(obj, level=0.01, threshold=0.05, statistic="cdf_sup") -> GofReport:
    """Compare a one-dimensional conditioned endpoint law with the Rayleigh law.

    ``obj`` may be a PathEnsemble (KS on scaled endpoints), a 1D MassMap
    (binned distance at width 2 / sqrt(n)), or a plain sample array.
    """
    if isinstance(obj, PathEnsemble):
        ends = obj.endpoints()[:, 0]
        return ks_one_sample(ends, rayleigh_cdf, level=level, ess=obj.ess,
                             name="rayleigh_ks")
    if isinstance(obj, MassMap):
        if obj.points.shape[1] != 1:
            raise ValueError("rayleigh comparison needs a one-dimensional law")
        width = 2.0 / math.sqrt(obj.n)
        values = obj.normalized_points()[:, 0]
        stat = _binned_distance(values, obj.mass, rayleigh_cdf, width, statistic)
        note = f"binned at width {width:.6g}, statistic {statistic}"
        return GofReport(f"rayleigh_binned_{statistic}", stat, threshold,
                         float(len(obj.mass)), stat <= threshold, None, note)
    return ks_one_sample(obj, rayleigh_cdf, level=level, name="rayleigh_ks")


def boundary_occupation(ens: PathEnsemble, eps: float) -> BoundaryReport:
    """Mean fraction of grid times the scaled paths spend within eps of the boundary."""
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if ens.cone is None:
        raise ValueError("ensemble carries no cone")
    arr = ens.path_array()
    m, grid, d = arr.shape
    dists = ens.cone.boundary_distances(arr.reshape(m * grid, d))
    frac = (dists.reshape(m, grid) <= eps).mean(axis=1)
    return BoundaryReport(float(frac.mean()), frac, eps)
