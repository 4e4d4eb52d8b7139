"""Observation windows and axis-aligned box helpers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Window", "points_in_box"]


@dataclass(frozen=True)
class Window:
    """Centered axis-aligned observation box with an evaluation margin.

    The observation box has the given side length; sampling and interference
    evaluation take place on the buffered box whose side is side + 2 * margin.
    """

    side: float
    margin: float = 0.0
    dimension: int = 2
    center: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.side <= 0:
            raise ValueError("window side must be positive")
        if self.margin < 0:
            raise ValueError("window margin must be nonnegative")
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        center = tuple(float(c) for c in self.center)
        if not center:
            center = (0.0,) * self.dimension
        if len(center) != self.dimension:
            raise ValueError("center length must match dimension")
        object.__setattr__(self, "center", center)

    @property
    def buffered_side(self) -> float:
        return self.side + 2.0 * self.margin

    @property
    def volume(self) -> float:
        return self.side**self.dimension

    @property
    def buffered_volume(self) -> float:
        return self.buffered_side**self.dimension

    def _bounds(self, buffered: bool) -> tuple[np.ndarray, np.ndarray]:
        half = (self.buffered_side if buffered else self.side) / 2.0
        c = np.asarray(self.center, dtype=float)
        return c - half, c + half

    def lo(self, buffered: bool = False) -> np.ndarray:
        return self._bounds(buffered)[0]

    def hi(self, buffered: bool = False) -> np.ndarray:
        return self._bounds(buffered)[1]

    def contains(self, points: np.ndarray, buffered: bool = False) -> np.ndarray:
        """Boolean mask of points inside the (buffered) box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        half = (self.buffered_side if buffered else self.side) / 2.0
        c = np.asarray(self.center, dtype=float)
        return np.all(np.abs(pts - c) <= half, axis=1)


def points_in_box(points: np.ndarray, center: np.ndarray, side: float) -> np.ndarray:
    """Mask of points within the axis-aligned cube of the given side."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    c = np.asarray(center, dtype=float)
    return np.all(np.abs(pts - c) <= side / 2.0, axis=1)
