"""Step distributions for mean-zero random walks with isotropic covariance.

Every distribution here has E[xi] = 0 and Cov(xi) = sigma^2 * I, the standing
assumptions behind the scaling limits the rest of the package verifies.
Constructors validate both properties and refuse anything else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MEAN_TOL = 1e-12
ISO_TOL = 1e-9

__all__ = [
    "LatticeStep",
    "DiskStep",
    "WalkPath",
    "srw1d",
    "srw2d",
    "srw3d",
    "two_step_srw2d",
    "lattice_from_atoms",
    "convolve",
    "scale_lattice",
    "moments",
    "sample_step",
    "parse_walk",
]


def _validate_moments(atoms, probs):
    total = math.fsum(probs)
    if abs(total - 1.0) > MEAN_TOL:
        raise ValueError(f"atom probabilities sum to {total!r}, not 1")
    if np.any(probs < 0.0):
        raise ValueError("atom probabilities must be nonnegative")
    d = atoms.shape[1]
    mean = np.array([math.fsum(atoms[:, j] * probs) for j in range(d)])
    if np.max(np.abs(mean)) > MEAN_TOL:
        raise ValueError(f"step mean must be zero, got {mean.tolist()}")
    cov = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            cov[i, j] = math.fsum(atoms[:, i] * atoms[:, j] * probs)
    diag = np.diag(cov)
    off = cov - np.diag(diag)
    if np.max(np.abs(off)) > ISO_TOL:
        raise ValueError("step covariance must be diagonal (isotropy violated)")
    if diag.max() - diag.min() > ISO_TOL:
        raise ValueError(
            f"step covariance must be sigma^2 * I, got diagonal {diag.tolist()}"
        )
    sigma2 = float(diag.mean())
    if sigma2 <= 0.0:
        raise ValueError("step distribution must have positive variance")
    return sigma2


@dataclass(frozen=True)
class LatticeStep:
    """Finitely supported step law on the integer lattice.

    Fields:
        atoms: (m, d) integer array of support points.
        probs: (m,) probabilities, summing to one.
        name:  short identifier used in reports and spec strings.
    """

    atoms: np.ndarray
    probs: np.ndarray
    name: str = "lattice"
    sigma2: float = field(init=False)

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms))
        if not np.issubdtype(atoms.dtype, np.integer):
            rounded = np.rint(atoms)
            if np.max(np.abs(atoms - rounded)) > 0:
                raise ValueError("lattice atoms must have integer coordinates")
            atoms = rounded
        atoms = atoms.astype(np.int64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (atoms.shape[0],):
            raise ValueError("probs must align with atoms")
        if atoms.shape[1] not in (1, 2, 3):
            raise ValueError("supported dimensions are 1, 2, 3")
        seen = {tuple(a) for a in atoms.tolist()}
        if len(seen) != len(atoms):
            raise ValueError("duplicate atoms in support")
        sigma2 = _validate_moments(atoms.astype(np.float64), probs)
        atoms.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def dim(self):
        return int(self.atoms.shape[1])

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    def moments(self):
        """Exact (mean, covariance) of the step law."""
        d = self.dim
        a = self.atoms.astype(np.float64)
        mean = np.array([math.fsum(a[:, j] * self.probs) for j in range(d)])
        cov = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                cov[i, j] = math.fsum(a[:, i] * a[:, j] * self.probs)
        return mean, cov

    def sample(self, rng, size=None):
        """Draw steps; returns (d,) for size=None, else (size, d)."""
        if size is None:
            idx = rng.choice(len(self.probs), p=self.probs)
            return self.atoms[idx].copy()
        idx = rng.choice(len(self.probs), size=size, p=self.probs)
        return self.atoms[idx]

    def as_dict(self):
        return {tuple(int(v) for v in a): float(p)
                for a, p in zip(self.atoms, self.probs)}

    def spec_string(self):
        return self.name


@dataclass(frozen=True)
class DiskStep:
    """Uniform step on a centred disk of given radius (2D, continuous).

    Declared moments: mean zero, covariance (radius^2 / 4) * I.
    """

    radius: float = 2.0
    name: str = "disk"

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("disk radius must be positive")

    @property
    def dim(self):
        return 2

    @property
    def sigma2(self):
        return self.radius * self.radius / 4.0

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    def moments(self):
        return np.zeros(2), np.eye(2) * self.sigma2

    def sample(self, rng, size=None):
        m = 1 if size is None else size
        r = self.radius * np.sqrt(rng.random(m))
        ang = rng.random(m) * (2.0 * math.pi)
        pts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
        return pts[0] if size is None else pts

    def spec_string(self):
        return f"disk:radius={self.radius!r}"


@dataclass(frozen=True)
class WalkPath:
    """A single walk trajectory, stored as its increments."""

    steps: np.ndarray

    def __post_init__(self):
        steps = np.atleast_2d(np.asarray(self.steps))
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)

    @property
    def partial_sums(self):
        """Positions S_1..S_n as an (n, d) array."""
        return np.cumsum(self.steps, axis=0)

    def in_support(self, dist) -> bool:
        """True when every increment is an atom of the lattice law."""
        support = dist.as_dict()
        return all(tuple(int(v) for v in s) in support for s in self.steps)


# -- built-in walks ----------------------------------------------------------


def srw1d() -> LatticeStep:
    """Simple random walk on Z: steps +-1 with probability 1/2."""
    return LatticeStep(np.array([[1], [-1]]), np.array([0.5, 0.5]), name="srw1d")


def srw2d() -> LatticeStep:
    """Simple random walk on Z^2: unit steps with probability 1/4 each."""
    atoms = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    return LatticeStep(atoms, np.full(4, 0.25), name="srw2d")


def srw3d() -> LatticeStep:
    """Simple random walk on Z^3: unit steps with probability 1/6 each."""
    atoms = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    )
    return LatticeStep(atoms, np.full(6, 1.0 / 6.0), name="srw3d")


def two_step_srw2d() -> LatticeStep:
    """Law of S_2 for the planar simple random walk (one step = two srw steps).

    Nine atoms: stay put with probability 4/16, axis moves by 2 with 1/16,
    diagonal moves with 2/16.  Unit per-coordinate variance.
    """
    atoms = np.array(
        [
            [0, 0],
            [2, 0], [-2, 0], [0, 2], [0, -2],
            [1, 1], [1, -1], [-1, 1], [-1, -1],
        ]
    )
    probs = np.array([4, 1, 1, 1, 1, 2, 2, 2, 2], dtype=np.float64) / 16.0
    return LatticeStep(atoms, probs, name="srw2d-2step")


def lattice_from_atoms(mapping, name="lattice") -> LatticeStep:
    """Build a lattice step law from a {point: probability} mapping."""
    items = sorted(mapping.items())
    atoms = np.array([list(k) for k, _ in items])
    probs = np.array([p for _, p in items], dtype=np.float64)
    return LatticeStep(atoms, probs, name=name)


def convolve(a: LatticeStep, b: LatticeStep) -> LatticeStep:
    """Law of the sum of one step of ``a`` and one independent step of ``b``."""
    if a.dim != b.dim:
        raise ValueError("convolution requires matching dimensions")
    out: dict = {}
    for xa, pa in zip(a.atoms.tolist(), a.probs):
        for xb, pb in zip(b.atoms.tolist(), b.probs):
            key = tuple(u + v for u, v in zip(xa, xb))
            out[key] = out.get(key, 0.0) + float(pa) * float(pb)
    return lattice_from_atoms(out, name=f"{a.name}*{b.name}")


def scale_lattice(dist: LatticeStep, factor: int) -> LatticeStep:
    """Scale every atom by an integer factor (variance scales by factor^2)."""
    if int(factor) != factor or factor == 0:
        raise ValueError("scale factor must be a nonzero integer")
    return LatticeStep(dist.atoms * int(factor), dist.probs,
                       name=f"{dist.name}x{int(factor)}")


# -- module-level conveniences ------------------------------------------------


def moments(dist):
    """(mean, covariance) of a step law; continuous laws must declare theirs."""
    fn = getattr(dist, "moments", None)
    if fn is None:
        raise ValueError(f"{dist!r} does not declare its moments")
    return fn()


def sample_step(dist, rng, size=None):
    """Draw one step (default) or ``size`` independent steps from the law."""
    return dist.sample(rng) if size is None else dist.sample(rng, size)


_BUILTINS = {
    "srw1d": srw1d,
    "srw2d": srw2d,
    "srw3d": srw3d,
    "srw2d-2step": two_step_srw2d,
}


def parse_walk(spec: str):
    """Parse a walk description string.

    Accepted forms: ``srw1d``, ``srw2d``, ``srw3d``, ``srw2d-2step`` and
    ``lattice:@file.json`` where the file holds a JSON list of
    ``[[dx, dy, ...], p]`` atom/probability pairs.
    """
    spec = spec.strip()
    if spec in _BUILTINS:
        return _BUILTINS[spec]()
    if spec.startswith("lattice:@"):
        path = spec[len("lattice:@"):]
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        try:
            atoms = np.asarray([entry[0] for entry in payload])
            probs = np.asarray([entry[1] for entry in payload], dtype=np.float64)
        except (IndexError, TypeError, ValueError) as exc:
            raise ValueError(
                f"walk file {path!r} must hold a list of [atom, prob] pairs"
            ) from exc
        return LatticeStep(atoms, probs, name="lattice")
    raise ValueError(f"unrecognized walk spec {spec!r}")
