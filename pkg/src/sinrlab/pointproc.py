"""Marked point processes on buffered windows.

Samplers produce Poisson and Cox configurations on the buffered window of
an observation box, mark them with independent transmission powers, and
support power thinning. Positions are immutable after construction and are
checked for degeneracies that would break distance-based constructions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Window
from .measures import DirectingMeasureRealization
from .rng import as_generator

__all__ = [
    "PowerDistribution",
    "MarkedConfiguration",
    "NonequidistanceWarning",
    "sample_ppp",
    "sample_cox",
    "mark_powers",
    "thin_by_power",
    "empirical_intensity",
    "min_relative_distance_gap",
]

DIRAC = "dirac"
EXPONENTIAL = "exponential"
PARETO = "pareto"
UNIFORM = "uniform"

# Full pairwise-distance uniqueness is checked at build time only below this
# size: with k pairs the chance of a spurious 1e-12-relative coincidence
# grows like k**2 and stops being a useful diagnostic for large samples.
_NONEQUIDISTANCE_CHECK_LIMIT = 512
_NONEQUIDISTANCE_RTOL = 1e-12


class NonequidistanceWarning(UserWarning):
    """Two pairwise distances coincide to within tolerance."""


@dataclass(frozen=True)
class PowerDistribution:
    """Distribution of the i.i.d. power marks."""

    kind: str
    p: float = math.nan  # dirac
    mean: float = math.nan  # exponential
    shape: float = math.nan  # pareto
    scale: float = math.nan  # pareto
    lo: float = math.nan  # uniform
    hi: float = math.nan  # uniform

    def __post_init__(self) -> None:
        if self.kind == DIRAC:
            if not self.p > 0:
                raise ValueError("dirac power must be positive")
        elif self.kind == EXPONENTIAL:
            if not self.mean > 0:
                raise ValueError("exponential mean must be positive")
        elif self.kind == PARETO:
            if not (self.shape > 0 and self.scale > 0):
                raise ValueError("pareto shape and scale must be positive")
        elif self.kind == UNIFORM:
            if not (0 < self.lo < self.hi):
                raise ValueError("uniform bounds must satisfy 0 < lo < hi")
        else:
            raise ValueError(f"unknown power distribution: {self.kind!r}")

    @classmethod
    def dirac(cls, p: float) -> "PowerDistribution":
        return cls(kind=DIRAC, p=p)

    @classmethod
    def exponential(cls, mean: float) -> "PowerDistribution":
        return cls(kind=EXPONENTIAL, mean=mean)

    @classmethod
    def pareto(cls, shape: float, scale: float) -> "PowerDistribution":
        return cls(kind=PARETO, shape=shape, scale=scale)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "PowerDistribution":
        return cls(kind=UNIFORM, lo=lo, hi=hi)

    @property
    def heavy_tail(self) -> bool:
        """Flags marks without exponential moments."""
        return self.kind == PARETO

    def expectation(self) -> float:
        if self.kind == DIRAC:
            return self.p
        if self.kind == EXPONENTIAL:
            return self.mean
        if self.kind == PARETO:
            if self.shape <= 1:
                return math.inf
            return self.shape * self.scale / (self.shape - 1.0)
        return 0.5 * (self.lo + self.hi)

    def survival(self, threshold: float) -> float:
        """P(power >= threshold)."""
        t = float(threshold)
        if self.kind == DIRAC:
            return 1.0 if self.p >= t else 0.0
        if t <= 0:
            return 1.0
        if self.kind == EXPONENTIAL:
            return math.exp(-t / self.mean)
        if self.kind == PARETO:
            return 1.0 if t <= self.scale else (self.scale / t) ** self.shape
        if t <= self.lo:
            return 1.0
        if t >= self.hi:
            return 0.0
        return (self.hi - t) / (self.hi - self.lo)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == DIRAC:
            return np.full(n, self.p)
        if self.kind == EXPONENTIAL:
            return rng.exponential(self.mean, size=n)
        if self.kind == PARETO:
            return self.scale * (1.0 + rng.pareto(self.shape, size=n))
        return rng.uniform(self.lo, self.hi, size=n)


@dataclass(frozen=True)
class MarkedConfiguration:
    """Point positions with optional power marks on a buffered window."""

    points: np.ndarray
    window: Window
    powers: np.ndarray | None = None
    power_spec: PowerDistribution | None = None
    seed_path: tuple = ()

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2:
            pts = pts.reshape(-1, self.window.dimension)
        if pts.shape[1] != self.window.dimension:
            raise ValueError("point dimension does not match the window")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.powers is not None:
            pw = np.ascontiguousarray(np.asarray(self.powers, dtype=float))
            if pw.shape != (len(pts),):
                raise ValueError("powers must match the point count")
            if np.any(pw <= 0):
                raise ValueError("powers must be positive")
            pw.setflags(write=False)
            object.__setattr__(self, "powers", pw)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.window.dimension

    @property
    def is_marked(self) -> bool:
        return self.powers is not None

    @property
    def heavy_tail(self) -> bool:
        return self.power_spec is not None and self.power_spec.heavy_tail

    def observation_mask(self) -> np.ndarray:
        return self.window.contains(self.points) if self.size else np.zeros(0, bool)

    def subset(self, index: np.ndarray) -> "MarkedConfiguration":
        return replace(
            self,
            points=self.points[index],
            powers=None if self.powers is None else self.powers[index],
        )


def min_relative_distance_gap(points: np.ndarray) -> float:
    """Smallest relative gap between distinct pairwise distances.

    Returns inf for configurations with fewer than two distinct pairs; a
    value of exactly 0 means two pairwise distances coincide bitwise.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        return math.inf
    diffs = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diffs * diffs, axis=2))
    iu = np.triu_indices(n, k=1)
    d = np.sort(dist[iu])
    if len(d) < 2:
        return math.inf
    gaps = np.diff(d)
    scale = np.maximum(d[1:], np.finfo(float).tiny)
    return float(np.min(gaps / scale))


def _check_degeneracies(config: MarkedConfiguration) -> None:
    n = config.size
    if n < 2:
        return
    if n <= _NONEQUIDISTANCE_CHECK_LIMIT:
        gap = min_relative_distance_gap(config.points)
        if gap <= _NONEQUIDISTANCE_RTOL:
            warnings.warn(
                f"pairwise distances coincide to relative gap {gap:.3e}",
                NonequidistanceWarning,
                stacklevel=3,
            )
    else:
        # full pairwise check is unreliable and costly here; still reject
        # exactly duplicated positions
        order = np.lexsort(config.points.T)
        sorted_pts = config.points[order]
        if np.any(np.all(sorted_pts[1:] == sorted_pts[:-1], axis=1)):
            raise ValueError("sampled configuration contains duplicate positions")


def sample_ppp(
    intensity: float, window: Window, seed: int | np.random.Generator
) -> MarkedConfiguration:
    """Homogeneous Poisson configuration on the buffered window."""
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    rng = as_generator(seed)
    count = rng.poisson(intensity * window.buffered_volume)
    lo = np.asarray(window.center, dtype=float) - window.buffered_side / 2.0
    pts = lo + window.buffered_side * rng.random((count, window.dimension))
    config = MarkedConfiguration(points=pts, window=window, seed_path=_path(seed))
    _check_degeneracies(config)
    return config


def sample_cox(
    measure: DirectingMeasureRealization,
    intensity: float,
    seed: int | np.random.Generator,
) -> MarkedConfiguration:
    """Cox configuration directed by a sampled measure.

    Density payloads are sampled by rejection against the density supremum,
    which is exact; skeleton payloads by a Poisson count on the total length
    followed by length-proportional segment inversion.
    """
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    rng = as_generator(seed)
    window = measure.window
    if measure.has_density:
        sup = measure.density_sup
        count = rng.poisson(intensity * sup * window.buffered_volume)
        lo = np.asarray(window.center, dtype=float) - window.buffered_side / 2.0
        proposals = lo + window.buffered_side * rng.random((count, window.dimension))
        if count:
            accept = rng.random(count) * sup < measure.density_at(proposals)
            pts = proposals[accept]
        else:
            pts = proposals
    else:
        lengths = measure.segment_lengths
        total = float(np.sum(lengths)) / measure.spec.normalization
        count = rng.poisson(intensity * total)
        if count and len(lengths):
            cum = np.cumsum(lengths)
            u = rng.random(count) * cum[-1]
            seg_idx = np.searchsorted(cum, u, side="right")
            seg_idx = np.minimum(seg_idx, len(lengths) - 1)
            t = rng.random(count)
            a = measure.segments[seg_idx, 0]
            b = measure.segments[seg_idx, 1]
            pts = a + t[:, None] * (b - a)
        else:
            pts = np.zeros((0, window.dimension))
    config = MarkedConfiguration(points=pts, window=window, seed_path=_path(seed))
    _check_degeneracies(config)
    return config


def mark_powers(
    config: MarkedConfiguration,
    mu: PowerDistribution,
    seed: int | np.random.Generator,
) -> MarkedConfiguration:
    """Attach i.i.d. power marks. Errors if the configuration is marked."""
    if config.is_marked:
        raise ValueError("configuration already carries power marks")
    rng = as_generator(seed)
    powers = mu.sample(rng, config.size)
    return replace(config, powers=powers, power_spec=mu)


def thin_by_power(config: MarkedConfiguration, threshold: float) -> MarkedConfiguration:
    """Keep exactly the points with power >= threshold."""
    if not config.is_marked:
        raise ValueError("configuration has no power marks to thin by")
    keep = np.flatnonzero(config.powers >= threshold)
    return config.subset(keep)


def empirical_intensity(config: MarkedConfiguration, region: Window) -> float:
    """Point count per unit volume of a region inside the buffered window."""
    if region.dimension != config.dimension:
        raise ValueError("region dimension mismatch")
    r_lo = region.lo()
    r_hi = region.hi()
    w_lo = config.window.lo(buffered=True)
    w_hi = config.window.hi(buffered=True)
    if np.any(r_lo < w_lo) or np.any(r_hi > w_hi):
        raise ValueError("region must lie inside the buffered window")
    if region.volume == 0:
        raise ValueError("region has zero volume")
    inside = region.contains(config.points) if config.size else np.zeros(0, bool)
    return float(np.count_nonzero(inside)) / region.volume


def _path(seed) -> tuple:
    return (repr(seed),) if not isinstance(seed, np.random.Generator) else ()
