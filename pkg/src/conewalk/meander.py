"""Endpoint law of the Brownian meander of a planar wedge.

For a wedge of opening angle beta, the Brownian path conditioned to stay in
the wedge up to time one ends at a point whose density against Lebesgue
measure, in polar coordinates (r, theta measured from the lower edge), is

    e(r, theta) = r^(2 alpha) 2^(-alpha) Gamma(alpha)^(-1)
                  exp(-r^2 / 2) sin(2 alpha theta),      alpha = pi / (2 beta).

Both marginals integrate in closed form: R^2 / 2 is Gamma(alpha + 1), and the
angle has CDF (1 - cos(2 alpha theta)) / 2.  The one-dimensional analogue of
the radial law is the Rayleigh distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cones import Wedge2D, meander_index
from .special import log_gamma, regularized_gamma_p

__all__ = ["MeanderEndpointLaw", "rayleigh_cdf"]


@dataclass(frozen=True)
class MeanderEndpointLaw:
    """Time-one endpoint law for the meander of a wedge with index alpha."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"meander index must be positive, got {self.alpha}")

    @classmethod
    def for_wedge(cls, cone) -> "MeanderEndpointLaw":
        if not isinstance(cone, Wedge2D):
            raise TypeError("endpoint law is defined for planar wedges only")
        return cls(alpha=meander_index(cone))

    @property
    def beta(self) -> float:
        """Wedge opening angle; alpha * beta = pi / 2 by construction."""
        return math.pi / (2.0 * self.alpha)

    def _check_theta(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if np.any(theta < 0.0) or np.any(theta > self.beta + 1e-12):
            raise ValueError(
                f"angle must lie in [0, beta] = [0, {self.beta!r}]"
            )
        return theta

    def endpoint_density(self, r, theta):
        """Density at polar point (r, theta) against planar Lebesgue measure."""
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0.0):
            raise ValueError("radius must be nonnegative")
        theta = self._check_theta(theta)
        a = self.alpha
        log_norm = -a * math.log(2.0) - log_gamma(a)
        with np.errstate(divide="ignore"):
            log_r = np.where(r > 0.0, np.log(np.maximum(r, 1e-300)), -np.inf)
        radial = np.exp(2.0 * a * log_r - 0.5 * r * r + log_norm)
        out = radial * np.sin(2.0 * a * theta)
        return out if out.shape else float(out)

    def radial_cdf(self, r):
        """P(|endpoint| <= r): regularized lower gamma P(alpha + 1, r^2 / 2)."""
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0.0):
            raise ValueError("radius must be nonnegative")
        flat = np.atleast_1d(r)
        vals = np.array(
            [regularized_gamma_p(self.alpha + 1.0, 0.5 * v * v) for v in flat]
        )
        return float(vals[0]) if r.shape == () else vals.reshape(r.shape)

    def angular_cdf(self, theta):
        """P(angle <= theta) = (1 - cos(2 alpha theta)) / 2 on [0, beta]."""
        theta = self._check_theta(theta)
        out = 0.5 * (1.0 - np.cos(2.0 * self.alpha * theta))
        return out if out.shape else float(out)

    def sample(self, rng, size=None):
        """Draw endpoints; returns (r, theta) scalars or arrays of length size.

        Radius via R = sqrt(2 G) with G ~ Gamma(alpha + 1); angle by inverting
        the angular CDF: theta = arccos(1 - 2 U) / (2 alpha).
        """
        m = 1 if size is None else int(size)
        g = rng.gamma(self.alpha + 1.0, 1.0, size=m)
        r = np.sqrt(2.0 * g)
        u = rng.random(m)
        theta = np.arccos(1.0 - 2.0 * u) / (2.0 * self.alpha)
        if size is None:
            return float(r[0]), float(theta[0])
        return r, theta

    def sample_points(self, rng, size, rotation=0.0):
        """Draw endpoints as Cartesian points, lower edge at ``rotation``."""
        r, theta = self.sample(rng, size=size)
        ang = theta + rotation
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)


def rayleigh_cdf(x):
    """CDF 1 - exp(-x^2 / 2) of the one-dimensional meander endpoint."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("rayleigh_cdf is defined for x >= 0")
    out = -np.expm1(-0.5 * x * x)
    return out if out.shape else float(out)
