"""Sampled immersion charts with derivatives up to third order.

A chart stores the positions of an immersion F: M^m -> R^n on a parameter
grid together with its first, second and (optionally) third parameter
derivatives.  Derivatives come from analytic callbacks when the immersion
provides them, otherwise from nested central finite differences of F.

Index conventions for the stored arrays (grid axes first):
    F    (*shape, n)
    dF   (*shape, m, n)        dF[..., i, a]    = d F^a / d x^i
    d2F  (*shape, m, m, n)
    d3F  (*shape, m, m, m, n)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .grid import Axis, ParameterGrid, grid_gradient, truncated_axis

DEFAULT_RANK_TOL = 1e-8


class DegenerateImmersionError(ValueError):
    """dF loses rank at an interior grid point."""


@dataclass(frozen=True)
class ImmersionMap:
    """Analytic immersion: position map plus optional derivative callbacks.

    Every callback is vectorized: it receives parameter values of shape
    ``(..., m)`` and returns ``(..., n)``, ``(..., m, n)``, ... respectively.
    """

    position: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    third: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "immersion"


@dataclass
class SampledChart:
    """Immersion sampled on a grid, with derivative arrays."""

    grid: ParameterGrid
    F: np.ndarray
    dF: np.ndarray
    d2F: np.ndarray
    d3F: Optional[np.ndarray] = None
    derivative_source: str = "analytic"
    name: str = "chart"

    @property
    def m(self) -> int:
        return self.grid.ndim

    @property
    def ambient_dim(self) -> int:
        return self.F.shape[-1]

    @property
    def codimension(self) -> int:
        return self.ambient_dim - self.m

    def third_derivatives(self) -> np.ndarray:
        """d3F, falling back to central differences of d2F."""
        if self.d3F is None:
            self.d3F = grid_gradient(self.d2F, self.grid)
        return self.d3F


def _check_rank(chart: SampledChart, rank_tol: float) -> None:
    interior = chart.grid.interior_mask()
    sv = np.linalg.svd(chart.dF, compute_uv=False)
    smallest = sv[..., -1]
    bad = (smallest <= rank_tol) & interior
    if np.any(bad):
        idx = tuple(int(v[0]) for v in np.nonzero(bad))
        params = chart.grid.coords()[idx]
        raise DegenerateImmersionError(
            f"immersion '{chart.name}' is rank deficient at grid index {idx} "
            f"(parameters {params.tolist()}, smallest singular value "
            f"{smallest[idx]:.3e} <= {rank_tol:.1e})"
        )


def evaluate_chart(
    imm: ImmersionMap,
    grid: ParameterGrid,
    rank_tol: float = DEFAULT_RANK_TOL,
    with_third: bool = False,
) -> SampledChart:
    """Sample an immersion on a grid.

    Derivatives use the analytic callbacks where available and nested
    second-order central differences otherwise; the chart records which.
    Raises :class:`DegenerateImmersionError` when dF drops rank at an
    interior point.
    """
    x = grid.coords()
    F = np.asarray(imm.position(x), dtype=float)
    if F.shape[:-1] != grid.shape:
        raise ValueError(
            f"position map returned shape {F.shape}, expected (*{grid.shape}, n)"
        )

    analytic = True
    if imm.jacobian is not None:
        dF = np.asarray(imm.jacobian(x), dtype=float)
    else:
        dF = grid_gradient(F, grid)
        analytic = False
    if imm.hessian is not None:
        d2F = np.asarray(imm.hessian(x), dtype=float)
    else:
        d2F = grid_gradient(dF, grid)
        analytic = False

    d3F = None
    if imm.third is not None:
        d3F = np.asarray(imm.third(x), dtype=float)
    elif with_third:
        d3F = grid_gradient(d2F, grid)

    chart = SampledChart(
        grid=grid,
        F=F,
        dF=dF,
        d2F=d2F,
        d3F=d3F,
        derivative_source="analytic" if analytic else "finite_difference",
        name=imm.name,
    )
    _check_rank(chart, rank_tol)
    return chart


def make_product(a: SampledChart, b: SampledChart, name: str | None = None) -> SampledChart:
    """Product immersion A x B into R^{n_a+n_b} on the tensor-product grid."""
    ma, mb = a.m, b.m
    na, nb = a.ambient_dim, b.ambient_dim
    sa, sb = a.grid.shape, b.grid.shape
    m, n = ma + mb, na + nb
    shape = sa + sb

    def expand_a(arr: np.ndarray) -> np.ndarray:
        # (*sa, *t) -> (*sa, *sb, *t)
        t = arr.shape[len(sa):]
        view = arr.reshape(sa + (1,) * len(sb) + t)
        return np.broadcast_to(view, shape + t)

    def expand_b(arr: np.ndarray) -> np.ndarray:
        t = arr.shape[len(sb):]
        view = arr.reshape((1,) * len(sa) + sb + t)
        return np.broadcast_to(view, shape + t)

    F = np.zeros(shape + (n,))
    F[..., :na] = expand_a(a.F)
    F[..., na:] = expand_b(b.F)

    dF = np.zeros(shape + (m, n))
    dF[..., :ma, :na] = expand_a(a.dF)
    dF[..., ma:, na:] = expand_b(b.dF)

    d2F = np.zeros(shape + (m, m, n))
    d2F[..., :ma, :ma, :na] = expand_a(a.d2F)
    d2F[..., ma:, ma:, na:] = expand_b(b.d2F)

    d3F = None
    if a.d3F is not None and b.d3F is not None:
        d3F = np.zeros(shape + (m, m, m, n))
        d3F[..., :ma, :ma, :ma, :na] = expand_a(a.d3F)
        d3F[..., ma:, ma:, ma:, na:] = expand_b(b.d3F)

    source = (
        "analytic"
        if a.derivative_source == "analytic" and b.derivative_source == "analytic"
        else "finite_difference"
    )
    return SampledChart(
        grid=ParameterGrid(a.grid.axes + b.grid.axes),
        F=F,
        dF=dF,
        d2F=d2F,
        d3F=d3F,
        derivative_source=source,
        name=name or f"{a.name}*{b.name}",
    )


def line_chart(half_length: float, count: int = 32) -> SampledChart:
    """Flat line segment [-L, L] in R^1 (a flat product factor)."""
    ax = truncated_axis(count, -half_length, half_length)
    grid = ParameterGrid((ax,))
    x = grid.coords()
    F = x.copy()
    dF = np.ones(grid.shape + (1, 1))
    d2F = np.zeros(grid.shape + (1, 1, 1))
    d3F = np.zeros(grid.shape + (1, 1, 1, 1))
    return SampledChart(grid, F, dF, d2F, d3F, "analytic", name="line")


def make_cylinder(
    curve_chart: SampledChart,
    flat_factors: int,
    half_length: float,
    flat_count: int = 32,
    name: str | None = None,
) -> SampledChart:
    """Curve x [-L, L]^k, flat directions appended as new ambient coordinates."""
    if curve_chart.m != 1:
        raise ValueError("make_cylinder needs a one-dimensional curve chart")
    if flat_factors < 1:
        raise ValueError("flat_factors must be >= 1")
    if half_length <= 0:
        raise ValueError("half_length must be positive")
    out = curve_chart
    for _ in range(flat_factors):
        out = make_product(out, line_chart(half_length, flat_count))
    out.name = name or f"{curve_chart.name}_cyl{flat_factors}"
    return out


def dump_chart(chart: SampledChart, path: str | Path) -> None:
    """Columnar text dump (grid multi-index, F components) + JSON sidecar."""
    path = Path(path)
    idx = np.indices(chart.grid.shape).reshape(chart.grid.ndim, -1).T
    flatF = chart.F.reshape(-1, chart.ambient_dim)
    cols = np.hstack([idx.astype(float), flatF])
    header = " ".join(
        [f"i{k}" for k in range(chart.grid.ndim)]
        + [f"F{a}" for a in range(chart.ambient_dim)]
    )
    np.savetxt(path, cols, header=header)
    sidecar = {
        "name": chart.name,
        "ambient_dim": chart.ambient_dim,
        "derivative_source": chart.derivative_source,
        "axes": chart.grid.describe(),
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
