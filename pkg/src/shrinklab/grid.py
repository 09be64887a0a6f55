"""Uniform parameter grids and finite differences for sampled immersions.

Grids are tensor products of one-dimensional axes.  An axis is either
periodic (indices wrap) or truncated (a margin of points near each end is
excluded from every residual statistic, so that all interior stencils stay
central).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_AXIS_COUNT = 8
# Minimum excluded margin on truncated axes.  One-sided edge stencils feed
# nested finite differences; with a finite-difference-source chart the
# deepest pipeline (F -> dF -> d2F -> nabla_perp -> second nabla_perp)
# pollutes exactly 4 points, so statistics start at index 4.
TRUNCATED_MARGIN = 4
MIN_TRUNCATED_MARGIN = 3


@dataclass(frozen=True)
class Axis:
    """One uniformly sampled parameter axis."""

    count: int
    spacing: float
    periodic: bool = True
    start: float = 0.0
    margin: int = TRUNCATED_MARGIN

    def __post_init__(self):
        if self.count < MIN_AXIS_COUNT:
            raise ValueError(
                f"axis needs at least {MIN_AXIS_COUNT} points, got {self.count}"
            )
        if self.spacing <= 0.0:
            raise ValueError("axis spacing must be positive")
        if not self.periodic and self.margin < MIN_TRUNCATED_MARGIN:
            raise ValueError(
                f"truncated axis needs margin >= {MIN_TRUNCATED_MARGIN}, got {self.margin}"
            )

    @property
    def points(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.count)

    @property
    def length(self) -> float:
        """Parameter length covered by the axis (period for periodic axes)."""
        if self.periodic:
            return self.count * self.spacing
        return (self.count - 1) * self.spacing

    def interior(self) -> np.ndarray:
        mask = np.ones(self.count, dtype=bool)
        if not self.periodic:
            mask[: self.margin] = False
            mask[self.count - self.margin :] = False
        return mask


def periodic_axis(count: int, period: float = 2.0 * np.pi, start: float = 0.0) -> Axis:
    return Axis(count=count, spacing=period / count, periodic=True, start=start)


def truncated_axis(count: int, lo: float, hi: float, margin: int = TRUNCATED_MARGIN) -> Axis:
    if hi <= lo:
        raise ValueError("truncated axis needs hi > lo")
    return Axis(
        count=count,
        spacing=(hi - lo) / (count - 1),
        periodic=False,
        start=lo,
        margin=margin,
    )


@dataclass(frozen=True)
class ParameterGrid:
    """Tensor product of axes; the sampling domain of a chart."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        if len(self.axes) == 0:
            raise ValueError("grid needs at least one axis")
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.count for ax in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def max_spacing(self) -> float:
        return max(ax.spacing for ax in self.axes)

    @property
    def all_periodic(self) -> bool:
        return all(ax.periodic for ax in self.axes)

    def coords(self) -> np.ndarray:
        """Parameter values at every grid point, shape ``(*shape, ndim)``."""
        mesh = np.meshgrid(*[ax.points for ax in self.axes], indexing="ij")
        return np.stack(mesh, axis=-1)

    def interior_mask(self) -> np.ndarray:
        """Boolean mask of points that enter residual statistics."""
        mask = np.ones(self.shape, dtype=bool)
        for i, ax in enumerate(self.axes):
            sl = [None] * self.ndim
            sl[i] = slice(None)
            mask &= ax.interior()[tuple(sl)]
        return mask

    def cell_weights(self) -> np.ndarray:
        """Quadrature weights (trapezoidal per axis), shape ``shape``."""
        w = np.ones(self.shape)
        for i, ax in enumerate(self.axes):
            w1 = np.full(ax.count, ax.spacing)
            if not ax.periodic:
                w1[0] *= 0.5
                w1[-1] *= 0.5
            sl = [None] * self.ndim
            sl[i] = slice(None)
            w = w * w1[tuple(sl)]
        return w

    def refine(self, factor: int = 2) -> "ParameterGrid":
        """Grid with each axis refined by ``factor`` over the same domain.

        Margins of truncated axes are scaled by the same factor so the
        interior region entering residual statistics stays physically fixed;
        convergence orders measured across refinements are then meaningful.
        """
        new = []
        for ax in self.axes:
            if ax.periodic:
                new.append(
                    Axis(ax.count * factor, ax.spacing / factor, True, ax.start, ax.margin)
                )
            else:
                count = (ax.count - 1) * factor + 1
                new.append(
                    Axis(count, ax.length / (count - 1), False, ax.start, ax.margin * factor)
                )
        return ParameterGrid(tuple(new))

    def describe(self) -> list[dict]:
        return [
            {
                "count": ax.count,
                "spacing": ax.spacing,
                "topology": "periodic" if ax.periodic else "truncated",
                "start": ax.start,
                "margin": None if ax.periodic else ax.margin,
            }
            for ax in self.axes
        ]


def grid_derivative(values: np.ndarray, grid: ParameterGrid, axis: int) -> np.ndarray:
    """Second-order first derivative of a sampled field along one grid axis.

    ``values`` may carry trailing tensor dimensions beyond the grid shape.
    Periodic axes use wrapped central differences; truncated axes use
    central differences with one-sided second-order stencils at the ends
    (those ends fall inside the excluded margin).
    """
    ax = grid.axes[axis]
    if ax.periodic:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (
            2.0 * ax.spacing
        )
    return np.gradient(values, ax.spacing, axis=axis, edge_order=2)


def grid_gradient(values: np.ndarray, grid: ParameterGrid) -> np.ndarray:
    """All axis derivatives, stacked in a new index just after the grid axes.

    For ``values`` of shape ``(*grid.shape, *t)`` returns
    ``(*grid.shape, ndim, *t)``.
    """
    parts = [grid_derivative(values, grid, i) for i in range(grid.ndim)]
    return np.stack(parts, axis=grid.ndim)
