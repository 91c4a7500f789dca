"""Monte Carlo samplers for walk paths conditioned to stay in a cone.

Two engines: plain rejection (exact but hopeless once the survival probability
drops below about 1e-6) and fixed-population multilevel splitting, whose
product-of-fractions tail estimate stays unbiased at any depth.

Reproducibility contract: work is cut into chunks whose boundaries depend only
on the request, never on the worker count; chunk i always consumes the random
stream addressed by (seed, ..., i) and results merge in chunk order.  The same
seed therefore produces byte-identical ensembles with 1 thread or 40.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .streams import child_rng

__all__ = [
    "NormalizedPath",
    "PathEnsemble",
    "RejectionFloorError",
    "LevelExtinctionError",
    "default_schedule",
    "rejection_sample",
    "splitting_sample",
    "path_functionals",
]

_WAVE_CHUNKS = 4        # chunks per rejection wave, fixed for determinism
_REJECTION_CHUNK = 4096  # attempts per chunk
_SPLIT_CHUNK = 2048      # particles per propagation chunk


class RejectionFloorError(RuntimeError):
    """Raised when the acceptance rate falls below the feasibility floor."""


class LevelExtinctionError(RuntimeError):
    """Raised when every splitting particle dies inside one level."""


@dataclass(frozen=True)
class NormalizedPath:
    """One conditioned path under the diffusive scaling S_[nt] / (sigma sqrt n).

    ``values`` holds the scaled positions on the grid t = k / n, k = 0..n;
    ``at`` interpolates linearly between grid points.
    """

    values: np.ndarray
    n: int
    sigma: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != self.n + 1:
            raise ValueError("values must have shape (n + 1, d)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self):
        return int(self.values.shape[1])

    @property
    def endpoint(self):
        return self.values[-1]

    def at(self, t: float) -> np.ndarray:
        if not (0.0 <= t <= 1.0):
            raise ValueError(f"time must lie in [0, 1], got {t}")
        pos = t * self.n
        i = int(math.floor(pos))
        if i >= self.n:
            return self.values[self.n].copy()
        frac = pos - i
        return (1.0 - frac) * self.values[i] + frac * self.values[i + 1]

    def sup_norm(self) -> float:
        return float(np.linalg.norm(self.values, axis=1).max())


@dataclass
class PathEnsemble:
    """A batch of conditioned paths plus the tail estimate that produced it."""

    paths: list
    method: str
    tail_estimate: float
    tail_stderr: float
    seed: int
    n: int
    sigma: float
    walk: str = ""
    cone: object = None
    ess: float = 0.0
    attempts: int = 0
    levels: list = field(default_factory=list)

    def __len__(self):
        return len(self.paths)

    def endpoints(self) -> np.ndarray:
        return np.stack([p.values[-1] for p in self.paths])

    def path_array(self) -> np.ndarray:
        """(m, n + 1, d) array of all scaled paths."""
        return np.stack([p.values for p in self.paths])


def _propagate(dist, cone, pos, hist, k_from, k_to, rng):
    """Step live particles from time k_from to k_to, recording positions.

    Returns the row indices still alive at k_to.  Particles draw steps only
    while alive, so the stream consumption is a deterministic function of the
    trajectory prefix.
    """
    alive = np.arange(pos.shape[0])
    for k in range(k_from + 1, k_to + 1):
        if alive.size == 0:
            break
        steps = dist.sample(rng, size=alive.size)
        pos[alive] += steps
        inside = cone.contains_many(pos[alive])
        alive = alive[inside]
        hist[alive, k] = pos[alive]
    return alive


def _map_ordered(worker, args, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, args))
    return [worker(a) for a in args]


def rejection_sample(dist, cone, n, count, seed, threads=1,
                     floor=1e-6, floor_attempts=2_000_000) -> PathEnsemble:
    """Sample ``count`` conditioned paths of length n by plain rejection.

    Raises RejectionFloorError once ``floor_attempts`` attempts put the
    estimated survival probability below ``floor``; multilevel splitting is
    the tool for those regimes.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if n <= 0:
        raise ValueError("n must be positive")
    d = dist.dim
    scale = dist.sigma * math.sqrt(n)

    def worker(chunk_idx):
        rng = child_rng(seed, 0, chunk_idx)
        pos = np.zeros((_REJECTION_CHUNK, d))
        hist = np.zeros((_REJECTION_CHUNK, n + 1, d))
        alive = _propagate(dist, cone, pos, hist, 0, n, rng)
        return hist[alive]

    survivors = []
    accepted = 0
    attempts = 0
    wave = 0
    while accepted < count:
        ids = range(wave * _WAVE_CHUNKS, (wave + 1) * _WAVE_CHUNKS)
        for block in _map_ordered(worker, ids, threads):
            survivors.append(block)
            accepted += block.shape[0]
        attempts += _WAVE_CHUNKS * _REJECTION_CHUNK
        wave += 1
        if attempts >= floor_attempts and accepted < floor * attempts:
            raise RejectionFloorError(
                f"acceptance rate {accepted}/{attempts} fell below {floor:g}; "
                "use splitting_sample for this regime"
            )
    kept = np.concatenate(survivors, axis=0)[:count]
    paths = [NormalizedPath(row / scale, n=n, sigma=dist.sigma) for row in kept]
    p_hat = accepted / attempts
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / attempts)
    return PathEnsemble(
        paths=paths, method="rejection", tail_estimate=p_hat, tail_stderr=stderr,
        seed=seed, n=n, sigma=dist.sigma, walk=dist.spec_string(), cone=cone,
        ess=float(count), attempts=attempts,
    )


def default_schedule(n: int) -> list:
    """Checkpoints ceil(n * j / J), j = 1..J with J = ceil(log2 n)."""
    if n <= 0:
        raise ValueError("n must be positive")
    J = max(1, math.ceil(math.log2(n)))
    return [math.ceil(n * j / J) for j in range(1, J + 1)]


@dataclass(frozen=True)
class LevelStat:
    """Per-level bookkeeping of a splitting run."""

    checkpoint: int
    fraction: float
    survivors: int


def splitting_sample(dist, cone, n, population, seed, schedule=None,
                     threads=1) -> PathEnsemble:
    """Fixed-population multilevel splitting estimate of P(T_C > n).

    Propagates ``population`` particles between checkpoints, records the
    surviving fraction f_j at each, and resamples survivors back to full
    population with replacement.  The product of the f_j is an unbiased tail
    estimate; the reported stderr comes from a per-level delta method and is
    approximate (it ignores resampling dependence).  Returned paths are the
    survivors of the final level; ``ess`` counts their distinct ancestors.
    """
    if population < 100:
        raise ValueError("population must be at least 100")
    if n <= 0:
        raise ValueError("n must be positive")
    if schedule is None:
        schedule = default_schedule(n)
    schedule = [int(v) for v in schedule]
    if schedule != sorted(set(schedule)) or schedule[0] < 1 or schedule[-1] != n:
        raise ValueError(
            "schedule must be strictly increasing positive checkpoints ending at n"
        )
    d = dist.dim
    K = int(population)
    pos = np.zeros((K, d))
    hist = np.zeros((K, n + 1, d))
    roots = np.arange(K)
    log_tail = 0.0
    var_acc = 0.0
    levels = []
    prev = 0
    alive = np.arange(K)
    for j, checkpoint in enumerate(schedule):
        chunks = [
            (c, min(c + _SPLIT_CHUNK, K)) for c in range(0, K, _SPLIT_CHUNK)
        ]

        def worker(item):
            ci, (lo, hi) = item
            rng = child_rng(seed, 1, j, ci)
            sub_alive = _propagate(
                dist, cone, pos[lo:hi], hist[lo:hi], prev, checkpoint, rng
            )
            return sub_alive + lo

        parts = _map_ordered(worker, list(enumerate(chunks)), threads)
        alive = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
        m = alive.size
        if m == 0:
            raise LevelExtinctionError(
                f"all {K} particles died between steps {prev} and {checkpoint} "
                f"(level {j + 1}/{len(schedule)})"
            )
        f = m / K
        log_tail += math.log(f)
        var_acc += (1.0 - f) / (f * K)
        levels.append(LevelStat(checkpoint, f, m))
        if checkpoint < n:
            rng = child_rng(seed, 2, j)
            draw = rng.integers(0, m, size=K)
            keep = alive[draw]
            pos = pos[keep].copy()
            hist = hist[keep].copy()
            roots = roots[keep].copy()
        else:
            pos = pos[alive]
            hist = hist[alive]
            roots = roots[alive]
        prev = checkpoint
    scale = dist.sigma * math.sqrt(n)
    paths = [NormalizedPath(row / scale, n=n, sigma=dist.sigma) for row in hist]
    tail = math.exp(log_tail)
    stderr = tail * math.sqrt(var_acc)
    return PathEnsemble(
        paths=paths, method="splitting", tail_estimate=tail, tail_stderr=stderr,
        seed=seed, n=n, sigma=dist.sigma, walk=dist.spec_string(), cone=cone,
        ess=float(np.unique(roots).size), attempts=K * len(schedule),
        levels=levels,
    )


def path_functionals(ens: PathEnsemble, eps: float = 0.05) -> dict:
    """Per-path summary table: endpoint, endpoint norm, sup norm, boundary time.

    ``boundary_fraction`` is the fraction of grid times k / n (k = 0..n) the
    scaled path spends within ``eps`` of the cone boundary.
    """
    if ens.cone is None:
        raise ValueError("ensemble carries no cone; cannot measure boundary time")
    endpoints = ens.endpoints()
    arr = ens.path_array()
    m, grid, d = arr.shape
    dists = ens.cone.boundary_distances(arr.reshape(m * grid, d))
    frac = (dists.reshape(m, grid) <= eps).mean(axis=1)
    return {
        "endpoint": endpoints,
        "endpoint_norm": np.linalg.norm(endpoints, axis=1),
        "sup_norm": np.linalg.norm(arr, axis=2).max(axis=1),
        "boundary_fraction": frac,
    }
