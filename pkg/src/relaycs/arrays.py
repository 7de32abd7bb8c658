"""Half-wavelength ULA steering vectors and angle-grid dictionaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class AngleGrid:
    """Strictly increasing azimuth angles in [0, 2*pi)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("angle grid must be a non-empty 1-D sequence")
        if np.any(pts < 0) or np.any(pts >= TWO_PI):
            raise ValueError("grid angles must lie in [0, 2*pi)")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid angles must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class SteeringDictionary:
    grid: AngleGrid
    num_elements: int
    matrix: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape


def steering_vector(num_elements: int, angle: float) -> np.ndarray:
    """Unit-norm ULA response ``exp(j*pi*n*sin(angle)) / sqrt(N)``, n = 0..N-1."""
    if int(num_elements) != num_elements or num_elements < 1:
        raise ValueError(f"num_elements must be a positive integer, got {num_elements!r}")
    n = np.arange(int(num_elements))
    return np.exp(1j * np.pi * n * np.sin(angle)) / np.sqrt(num_elements)


def sine_grid(count: int) -> AngleGrid:
    """Grid whose sines are uniform on [-1, 1), returned as sorted angles in [0, 2*pi).

    With ``count == num_elements`` the resulting dictionary is unitary (a
    phase-rotated DFT), and no two columns coincide.
    """
    if count < 1:
        raise ValueError("grid count must be positive")
    u = -1.0 + 2.0 * np.arange(count) / count
    angles = np.mod(np.arcsin(u), TWO_PI)
    # arcsin(-1) = -pi/2 maps to 3*pi/2, which stays inside [0, 2*pi)
    return AngleGrid(np.sort(angles))


def build_dictionary(num_elements: int, grid: AngleGrid) -> SteeringDictionary:
    if grid.count == 0:
        raise ValueError("empty grid")
    if int(num_elements) != num_elements or num_elements < 1:
        raise ValueError(f"num_elements must be a positive integer, got {num_elements!r}")
    n = np.arange(int(num_elements))[:, None]
    matrix = np.exp(1j * np.pi * n * np.sin(grid.points)[None, :]) / np.sqrt(num_elements)
    return SteeringDictionary(grid=grid, num_elements=int(num_elements), matrix=matrix)
