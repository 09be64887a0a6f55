"""Residual statistics, reports and convergence-order estimates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import ParameterGrid

# Residuals smaller than this are treated as round-off noise: convergence
# orders are not estimated from them.
NOISE_FLOOR = 1e-12


@dataclass
class ResidualReport:
    identity: str
    h: float
    max: float
    mean: float
    order: Optional[float] = None
    passed: Optional[bool] = None
    tolerance: Optional[float] = None
    mask_fraction: float = 0.0
    warning: Optional[str] = None

    def to_json(self) -> dict:
        """JSON object with the fixed report keys."""
        return {
            "identity": self.identity,
            "h": self.h,
            "max": self.max,
            "mean": self.mean,
            "order": self.order,
            "pass": self.passed,
        }

    def with_tolerance(self, tol: float) -> "ResidualReport":
        self.tolerance = tol
        self.passed = bool(self.max <= tol)
        return self


def residual_stats(
    identity: str,
    residual: np.ndarray,
    grid: ParameterGrid,
    mask: Optional[np.ndarray] = None,
) -> ResidualReport:
    """Max/mean of a residual field over the interior (and unmasked) points.

    ``mask`` marks points where the identity's hypotheses hold; the excluded
    fraction of the interior is recorded and a warning is set when masking
    covers more than half of it.
    """
    interior = grid.interior_mask()
    sel = interior if mask is None else (interior & mask)
    n_int = int(interior.sum())
    n_sel = int(sel.sum())
    mask_fraction = 1.0 - (n_sel / n_int) if n_int else 1.0
    if n_sel == 0:
        return ResidualReport(
            identity=identity,
            h=grid.max_spacing,
            max=float("nan"),
            mean=float("nan"),
            mask_fraction=1.0,
            warning="all interior points masked",
        )
    vals = np.abs(residual[sel])
    warning = None
    if mask is not None and mask_fraction > 0.5:
        warning = f"hypothesis mask covers {mask_fraction:.0%} of the interior"
    return ResidualReport(
        identity=identity,
        h=grid.max_spacing,
        max=float(vals.max()),
        mean=float(vals.mean()),
        mask_fraction=mask_fraction,
        warning=warning,
    )


def estimate_orders(reports: list[ResidualReport]) -> list[ResidualReport]:
    """Fill convergence orders into a coarse-to-fine sequence of reports.

    The order on each refinement is log2(res_coarse / res_fine) for the
    max residual.  Residuals at or below the round-off floor give no order.
    """
    if len(reports) < 2:
        return reports
    for prev, cur in zip(reports, reports[1:]):
        if prev.max <= NOISE_FLOOR or cur.max <= NOISE_FLOOR:
            cur.order = None
            continue
        ratio = np.log(prev.h / cur.h)
        if ratio <= 0:
            continue
        cur.order = float(np.log(prev.max / cur.max) / ratio)
    return reports
