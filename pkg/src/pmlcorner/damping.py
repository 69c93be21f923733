"""Cartesian PML absorption profiles sigma_x(x), sigma_y(y)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class DampingKind(str, Enum):
    CONSTANT = "constant"
    QUADRATIC = "quadratic"


class Region(str, Enum):
    FLUID = "fluid"
    X_LAYER = "x_layer"
    Y_LAYER = "y_layer"
    CORNER = "corner"


@dataclass(frozen=True)
class DampingProfile:
    """Separable damping around the undamped ``physical_box``.

    ``physical_box`` is ``(x_min, x_max, y_min, y_max)``; the box itself is
    closed, so its boundary is undamped. Outside it, the damping grows with
    the penetration depth ``d`` into the layer: the constant kind is
    ``amplitude`` everywhere, the quadratic kind is ``amplitude * (d/L)**2``.
    """

    physical_box: tuple[float, float, float, float]
    thickness: float
    kind: DampingKind
    amplitude: float

    def _depth(self, s: np.ndarray, lo: float, hi: float) -> np.ndarray:
        return np.maximum(lo - s, 0.0) + np.maximum(s - hi, 0.0)

    def _value(self, depth: np.ndarray) -> np.ndarray:
        if self.kind is DampingKind.CONSTANT:
            return np.where(depth > 0.0, self.amplitude, 0.0)
        return self.amplitude * (depth / self.thickness) ** 2

    def sigma_x(self, x):
        x = np.asarray(x, dtype=float)
        return self._value(self._depth(x, self.physical_box[0], self.physical_box[1]))

    def sigma_y(self, y):
        y = np.asarray(y, dtype=float)
        return self._value(self._depth(y, self.physical_box[2], self.physical_box[3]))

    @property
    def computational_domain(self) -> tuple[float, float, float, float]:
        x0, x1, y0, y1 = self.physical_box
        L = self.thickness
        return (x0 - L, x1 + L, y0 - L, y1 + L)


def make_profile(
    kind: DampingKind | str,
    amplitude: float,
    physical_box: tuple[float, float, float, float],
    thickness: float,
) -> DampingProfile:
    kind = DampingKind(kind)
    if amplitude < 0:
        raise ValueError(f"damping amplitude must be nonnegative, got {amplitude}")
    if thickness <= 0:
        raise ValueError(f"PML thickness must be positive, got {thickness}")
    x0, x1, y0, y1 = map(float, physical_box)
    if not (x1 >= x0 and y1 >= y0):
        raise ValueError(f"inverted physical box {physical_box!r}")
    return DampingProfile((x0, x1, y0, y1), float(thickness), kind, float(amplitude))


def uniform_profile(sigma_x: float, sigma_y: float | None = None):
    """Constant damping over the whole domain, i.e. a domain that is all corner.

    Returns a pair of 1D callables suitable for :func:`assemble`.
    """
    sy = sigma_x if sigma_y is None else sigma_y
    return (lambda x: np.full(np.shape(x), float(sigma_x)),
            lambda y: np.full(np.shape(y), float(sy)))


def classify_region(x: float, y: float, profile: DampingProfile) -> Region:
    sx = float(profile.sigma_x(x))
    sy = float(profile.sigma_y(y))
    if sx > 0 and sy > 0:
        return Region.CORNER
    if sx > 0:
        return Region.X_LAYER
    if sy > 0:
        return Region.Y_LAYER
    return Region.FLUID
