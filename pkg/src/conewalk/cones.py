"""Convex cones in dimension 1 to 3: membership, boundary distance, wedge index.

A cone here is a closed convex linear cone given as an intersection of
half-spaces through the origin.  Membership is closed (boundary points count
as inside), which matters for lattice walks whose conditioned mass can sit
exactly on a face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Relative slack absorbing trig roundoff in wedge edge normals.  A wedge angle
# given to 8 significant digits perturbs the normals by ~1e-8, so the slack
# must sit well above that while staying far below any lattice-scale gap.
DEFAULT_ANGLE_EPS = 1e-7

__all__ = [
    "Cone",
    "Wedge2D",
    "HalfLine1D",
    "HalfSpaceIntersection",
    "AdaptednessReport",
    "meander_index",
    "is_adapted",
    "parse_cone",
    "quarter_plane",
    "octant",
    "half_plane",
    "half_line",
    "pinched_cone_3d",
    "pinched_half_cone_3d",
]


def _as_points(points, dim):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(
            f"expected points of dimension {dim}, got array of shape {pts.shape}"
        )
    return pts


class Cone:
    """Base class: a closed convex cone, immutable after construction."""

    dim: int
    eps: float

    # -- membership ---------------------------------------------------------

    def contains_many(self, points, eps=None) -> np.ndarray:
        """Vectorized membership test; returns a boolean array."""
        raise NotImplementedError

    def contains(self, point, eps=None) -> bool:
        return bool(self.contains_many(point, eps=eps)[0])

    # -- boundary distance --------------------------------------------------

    def boundary_distances(self, points) -> np.ndarray:
        """Euclidean distance to the topological boundary, for inside points."""
        raise NotImplementedError

    def distance_to_boundary(self, point) -> float:
        return float(self.boundary_distances(point)[0])

    def spec_string(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec_string()!r})"


@dataclass(frozen=True)
class Wedge2D(Cone):
    """Planar wedge of opening angle beta, lower edge at angle ``rotation``.

    The wedge is {r(cos t, sin t) : r >= 0, rotation <= t <= rotation + beta}
    with 0 < beta <= pi.  Membership uses the two inward edge normals with a
    relative tolerance ``eps`` to absorb floating-point error in the normals.
    """

    beta: float
    rotation: float = 0.0
    eps: float = DEFAULT_ANGLE_EPS
    dim: int = field(default=2, init=False)
    normals: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 < self.beta <= math.pi):
            raise ValueError(f"wedge angle must lie in (0, pi], got {self.beta}")
        lo = self.rotation
        hi = self.rotation + self.beta
        n1 = (-math.sin(lo), math.cos(lo))
        n2 = (math.sin(hi), -math.cos(hi))
        normals = np.array([n1, n2], dtype=np.float64)
        normals.setflags(write=False)
        object.__setattr__(self, "normals", normals)

    def contains_many(self, points, eps=None):
        pts = _as_points(points, 2)
        tol = self.eps if eps is None else eps
        dots = pts @ self.normals.T
        slack = -tol * np.hypot(pts[:, 0], pts[:, 1])
        return (dots[:, 0] >= slack) & (dots[:, 1] >= slack)

    def boundary_distances(self, points):
        pts = _as_points(points, 2)
        inside = self.contains_many(pts)
        if not inside.all():
            raise ValueError("boundary distance is defined for points inside the cone")
        dots = pts @ self.normals.T
        return np.maximum(dots.min(axis=1), 0.0)

    def local_angle(self, points) -> np.ndarray:
        """Polar angle measured from the lower edge, clipped to [0, beta]."""
        pts = _as_points(points, 2)
        ang = np.arctan2(pts[:, 1], pts[:, 0]) - self.rotation
        ang = np.mod(ang + math.pi, 2.0 * math.pi) - math.pi
        return np.clip(ang, 0.0, self.beta)

    def spec_string(self):
        if self.rotation == 0.0:
            return f"wedge:beta={self.beta!r}"
        return f"wedge:beta={self.beta!r},rot={self.rotation!r}"


@dataclass(frozen=True)
class HalfLine1D(Cone):
    """The half-line [0, inf) in dimension one."""

    eps: float = 0.0
    dim: int = field(default=1, init=False)

    def contains_many(self, points, eps=None):
        pts = _as_points(points, 1)
        tol = self.eps if eps is None else eps
        x = pts[:, 0]
        return x >= -tol * np.abs(x)

    def boundary_distances(self, points):
        pts = _as_points(points, 1)
        if not self.contains_many(pts).all():
            raise ValueError("boundary distance is defined for points inside the cone")
        return np.maximum(pts[:, 0], 0.0)

    def spec_string(self):
        return "halfline"


@dataclass(frozen=True)
class HalfSpaceIntersection(Cone):
    """Intersection of half-spaces {x . n_i >= 0} through the origin.

    Normals may be given unnormalized (integer vectors keep lattice membership
    exact); they are rescaled internally only for distance computations.  The
    default tolerance is exact inequality, appropriate when the normals are
    exact; pass ``eps`` to absorb noise in floating normals.
    """

    raw_normals: tuple
    eps: float = 0.0
    dim: int = field(init=False)
    normals: np.ndarray = field(init=False, repr=False)
    unit_normals: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.raw_normals, dtype=np.float64))
        if normals.size == 0:
            raise ValueError("at least one half-space normal is required")
        d = normals.shape[1]
        if d not in (1, 2, 3):
            raise ValueError(f"supported dimensions are 1, 2, 3; got {d}")
        lengths = np.linalg.norm(normals, axis=1)
        if np.any(lengths == 0.0):
            raise ValueError("half-space normals must be nonzero")
        normals = normals.copy()
        normals.setflags(write=False)
        unit = normals / lengths[:, None]
        unit.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "unit_normals", unit)

    def contains_many(self, points, eps=None):
        pts = _as_points(points, self.dim)
        tol = self.eps if eps is None else eps
        dots = pts @ self.normals.T
        if tol == 0.0:
            return (dots >= 0.0).all(axis=1)
        scale = (np.linalg.norm(pts, axis=1)[:, None]
                 * np.linalg.norm(self.normals, axis=1)[None, :])
        return (dots >= -tol * scale).all(axis=1)

    def boundary_distances(self, points):
        pts = _as_points(points, self.dim)
        if not self.contains_many(pts).all():
            raise ValueError("boundary distance is defined for points inside the cone")
        dots = pts @ self.unit_normals.T
        return np.maximum(dots.min(axis=1), 0.0)

    def spec_string(self):
        parts = []
        for i, row in enumerate(np.atleast_2d(np.asarray(self.raw_normals, float))):
            coords = ",".join(f"{v:g}" for v in row)
            parts.append(f"n{i + 1}={coords}")
        return "halfspaces:" + ";".join(parts)


# -- named cones -------------------------------------------------------------


def quarter_plane() -> Wedge2D:
    """The closed first quadrant {x >= 0, y >= 0}."""
    return Wedge2D(beta=math.pi / 2)


def octant() -> Wedge2D:
    """The closed planar octant {0 <= y <= x}, opening angle pi/4."""
    return Wedge2D(beta=math.pi / 4)


def half_plane() -> Wedge2D:
    """The closed upper half-plane {y >= 0} as a degenerate wedge."""
    return Wedge2D(beta=math.pi)


def half_line() -> HalfLine1D:
    return HalfLine1D()


def pinched_cone_3d() -> HalfSpaceIntersection:
    """3D cone {0 <= x/2 <= y <= 2x}; its lattice interior pinches to the z-axis.

    A nearest-neighbour walk conditioned to stay here is confined to the line
    x = y = 0, which lies on the boundary.  Integer normals keep lattice
    membership exact.
    """
    return HalfSpaceIntersection(((1, 0, 0), (-1, 2, 0), (2, -1, 0)))


def pinched_half_cone_3d() -> HalfSpaceIntersection:
    """Same pinched cone intersected with {z >= 0}: a half-line of lattice states."""
    return HalfSpaceIntersection(((1, 0, 0), (-1, 2, 0), (2, -1, 0), (0, 0, 1)))


# -- wedge index -------------------------------------------------------------


def meander_index(cone) -> float:
    """Exponent alpha = pi / (2 beta) attached to a planar wedge."""
    if not isinstance(cone, Wedge2D):
        raise TypeError("the meander index is defined for planar wedges only")
    return math.pi / (2.0 * cone.beta)


# -- adaptedness -------------------------------------------------------------


@dataclass(frozen=True)
class AdaptednessReport:
    """Outcome of the walk/cone compatibility check."""

    adapted: bool
    method: str
    witness: tuple | None = None
    checked: int = 0
    note: str = ""

    def __bool__(self):
        return self.adapted


def is_adapted(cone, dist, n_samples: int = 10_000, rng=None) -> AdaptednessReport:
    """Check that the walk can take at least one step into C minus the origin.

    Lattice distributions are checked exactly by enumerating atoms.  Continuous
    distributions are checked by Monte Carlo with ``n_samples`` draws, which
    can only certify the positive answer.
    """
    atoms = getattr(dist, "atoms", None)
    if atoms is not None:
        probs = dist.probs
        inside = cone.contains_many(atoms.astype(np.float64))
        nonzero = np.any(atoms != 0, axis=1)
        hits = np.flatnonzero(inside & nonzero & (probs > 0.0))
        if hits.size:
            witness = tuple(int(v) for v in atoms[hits[0]])
            return AdaptednessReport(True, "lattice-exact", witness, int(len(atoms)))
        return AdaptednessReport(
            False, "lattice-exact", None, int(len(atoms)),
            "no positive-probability atom lies in the cone away from the origin",
        )
    if rng is None:
        rng = np.random.default_rng(0)
    draws = dist.sample(rng, size=n_samples)
    inside = cone.contains_many(draws)
    nonzero = np.any(draws != 0.0, axis=1)
    hits = np.flatnonzero(inside & nonzero)
    if hits.size:
        witness = tuple(float(v) for v in draws[hits[0]])
        return AdaptednessReport(
            True, "monte-carlo", witness, n_samples,
            "positive answer certified by a sampled witness",
        )
    return AdaptednessReport(
        False, "monte-carlo", None, n_samples,
        "no sampled step landed in the cone; negative answer is not certified",
    )


# -- parsing -----------------------------------------------------------------


def parse_cone(spec: str) -> Cone:
    """Parse a cone description string.

    Accepted forms:
      - ``halfline``
      - ``wedge:beta=<radians>[,rot=<radians>]``
      - ``halfspaces:n1=<a,b,c>;n2=...``  (2 or 3 coordinates per normal)
    """
    spec = spec.strip()
    if spec == "halfline":
        return HalfLine1D()
    if spec.startswith("wedge:"):
        beta = None
        rot = 0.0
        for item in spec[len("wedge:"):].split(","):
            item = item.strip()
            if not item:
                continue
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"malformed wedge parameter {item!r}")
            if key == "beta":
                beta = float(value)
            elif key == "rot":
                rot = float(value)
            else:
                raise ValueError(f"unknown wedge parameter {key!r}")
        if beta is None:
            raise ValueError("wedge spec requires beta=<radians>")
        return Wedge2D(beta=beta, rotation=rot)
    if spec.startswith("halfspaces:"):
        normals = []
        for seg in spec[len("halfspaces:"):].split(";"):
            seg = seg.strip()
            if not seg:
                continue
            _, _, coords = seg.partition("=")
            if not coords:
                raise ValueError(f"malformed half-space segment {seg!r}")
            normals.append(tuple(float(v) for v in coords.split(",")))
        if not normals:
            raise ValueError("halfspaces spec requires at least one normal")
        dims = {len(nrm) for nrm in normals}
        if len(dims) != 1:
            raise ValueError("all half-space normals must share one dimension")
        return HalfSpaceIntersection(tuple(normals))
    raise ValueError(f"unrecognized cone spec {spec!r}")
