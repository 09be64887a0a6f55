"""Abresch-Langer self-shrinking curves in the plane.

The curve is integrated in arclength with state (x, y, phi, k): position,
tangent angle and curvature.  Along exact solutions the quantity
k * exp(-|F|^2/2) is conserved; the integrator tracks it at every accepted
step and fails loudly when it drifts.  Closed curves are located by
shooting on the tangent angle swept per curvature period.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from .chart import SampledChart
from .grid import Axis, ParameterGrid

CONSERVED_MAX = float(np.exp(-0.5))  # max of k*exp(-k^2/2), attained at k=1


class IntegratorError(RuntimeError):
    """Conserved quantity drifted beyond the allowed budget."""


class NoRootError(ValueError):
    """No curvature satisfies the critical-value relation for this constant."""


def al_rhs(s: float, y: np.ndarray) -> np.ndarray:
    """Arclength derivative of (x, y, phi, k).

    dF/ds = T, dphi/ds = k, dk/ds = k <F, T>.
    """
    x, yy, phi, k = y
    c, sn = np.cos(phi), np.sin(phi)
    return np.array([c, sn, k, k * (x * c + yy * sn)])


def conserved_value(y: np.ndarray) -> np.ndarray:
    """k * exp(-|F|^2 / 2) along a state array (4,) or (4, N)."""
    return y[3] * np.exp(-0.5 * (y[0] ** 2 + y[1] ** 2))


def _tangential_position(s: float, y: np.ndarray) -> float:
    # <F, T>; zero exactly at the critical points of k
    return y[0] * np.cos(y[2]) + y[1] * np.sin(y[2])


_tangential_position.direction = 0


@dataclass
class ALTrajectory:
    k0: float
    c_gamma: float
    rel_tol: float
    sol: object                 # scipy OdeSolution-bearing result
    s_max: float
    critical_s: np.ndarray      # arclengths of curvature extrema
    conserved_drift: float

    def state(self, s) -> np.ndarray:
        return self.sol.sol(s)

    def positions(self, s) -> np.ndarray:
        st = self.state(s)
        return np.stack([st[0], st[1]], axis=-1)


def integrate(k0: float, rel_tol: float = 1e-10, s_max: float = 50.0) -> ALTrajectory:
    """Integrate from the critical-point initial condition F=(k0,0), T=(0,1).

    The start is a curvature critical point, so the conserved constant is
    exactly k0*exp(-k0^2/2).  Integration uses an adaptive embedded
    Runge-Kutta scheme (DOP853) with the given relative tolerance; drift of
    the conserved quantity beyond 100*rel_tol per unit arclength raises
    :class:`IntegratorError`.
    """
    if k0 <= 0:
        raise ValueError("k0 must be positive")
    y0 = np.array([k0, 0.0, 0.5 * np.pi, k0])
    res = solve_ivp(
        al_rhs,
        (0.0, s_max),
        y0,
        method="DOP853",
        rtol=rel_tol,
        atol=rel_tol * 1e-2,
        dense_output=True,
        events=_tangential_position,
        max_step=1.0,
    )
    if not res.success:
        raise IntegratorError(f"integration failed for k0={k0}: {res.message}")
    c0 = conserved_value(y0)
    drift = float(np.abs(conserved_value(res.y) - c0).max())
    if drift > 100.0 * rel_tol * s_max:
        raise IntegratorError(
            f"conserved quantity drifted by {drift:.3e} over arclength {s_max} "
            f"(allowed {100.0 * rel_tol * s_max:.3e}) for k0={k0}"
        )
    events = res.t_events[0]
    events = events[events > 1e-8]
    return ALTrajectory(
        k0=k0,
        c_gamma=float(c0),
        rel_tol=rel_tol,
        sol=res,
        s_max=s_max,
        critical_s=events,
        conserved_drift=drift,
    )


def critical_values(c: float, xtol: float = 1e-12) -> tuple[float, float]:
    """The two curvatures k with k*exp(-k^2/2) = c, bracketing 1.

    For c equal to the maximum exp(-1/2) the double root (1, 1) is
    returned; larger c has no solution (this threshold is what makes the
    critical value determine the curve uniquely).
    """
    if c <= 0:
        raise NoRootError("critical-value constant must be positive")
    if c > CONSERVED_MAX + 1e-14:
        raise NoRootError(
            f"no curvature satisfies k*exp(-k^2/2) = {c}: the maximum of the "
            f"left side is exp(-1/2) = {CONSERVED_MAX:.12f} at k = 1"
        )
    f = lambda k: k * np.exp(-0.5 * k * k) - c
    if abs(c - CONSERVED_MAX) < 1e-14:
        return (1.0, 1.0)
    lo = bisect(f, 1e-14, 1.0, xtol=xtol)
    hi_bracket = 2.0
    while f(hi_bracket) > 0.0:
        hi_bracket *= 2.0
    hi = bisect(f, 1.0, hi_bracket, xtol=xtol)
    return (float(lo), float(hi))


# ---------------------------------------------------------------------------
# period / rotation measurement and closed-curve search
# ---------------------------------------------------------------------------


@dataclass
class PeriodData:
    k0: float
    period: float        # arclength of one curvature period
    dphi: float          # tangent angle swept per curvature period
    k_extrema: tuple[float, float]


def curvature_period(k0: float, rel_tol: float = 1e-12, s_max: float = 20.0) -> PeriodData:
    """One curvature period: arclength and tangent rotation between returns
    to the starting critical point (k0 < 1 starts at a curvature minimum)."""
    if abs(k0 - 1.0) < 1e-13:
        raise ValueError("the circle k0=1 has constant curvature, no period")
    traj = integrate(k0, rel_tol=rel_tol, s_max=s_max)
    if len(traj.critical_s) < 2:
        raise IntegratorError(
            f"fewer than two curvature extrema within arclength {s_max} for k0={k0}"
        )
    s1, s2 = float(traj.critical_s[0]), float(traj.critical_s[1])
    st2 = traj.state(s2)
    st1 = traj.state(s1)
    return PeriodData(
        k0=k0,
        period=s2,
        dphi=float(st2[2] - 0.5 * np.pi),
        k_extrema=(k0, float(st1[3])),
    )


@dataclass
class ClosedCurveResult:
    k0: float
    rotation_p: int
    rotation_q: int
    period: float             # total arclength of the closed curve
    closure_defect: float
    conserved_drift: float
    c_gamma: float
    samples: np.ndarray       # (n_samples, 2) positions along the curve

    @property
    def is_circle(self) -> bool:
        return self.rotation_p == 1 and self.rotation_q == 1


def _closure_defect(traj: ALTrajectory, s_total: float, p: int) -> float:
    st = traj.state(s_total)
    pos_defect = float(np.hypot(st[0] - traj.k0, st[1] - 0.0))
    ang_defect = float(abs(st[2] - 0.5 * np.pi - 2.0 * np.pi * p))
    return pos_defect + ang_defect


def _circle_result(n_samples: int, rel_tol: float) -> ClosedCurveResult:
    traj = integrate(1.0, rel_tol=rel_tol, s_max=2.0 * np.pi + 0.1)
    defect = _closure_defect(traj, 2.0 * np.pi, 1)
    s = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    return ClosedCurveResult(
        k0=1.0,
        rotation_p=1,
        rotation_q=1,
        period=2.0 * np.pi,
        closure_defect=defect,
        conserved_drift=traj.conserved_drift,
        c_gamma=traj.c_gamma,
        samples=traj.positions(s),
    )


def verify_closed(
    k0: float, p: int, q: int, rel_tol: float = 1e-12, n_samples: int = 512
) -> ClosedCurveResult:
    """Integrate q curvature periods at k0 and measure the closure defect."""
    per = curvature_period(k0, rel_tol=rel_tol)
    s_total = q * per.period
    traj = integrate(k0, rel_tol=rel_tol, s_max=s_total)
    defect = _closure_defect(traj, s_total, p)
    s = np.linspace(0.0, s_total, n_samples, endpoint=False)
    return ClosedCurveResult(
        k0=k0,
        rotation_p=p,
        rotation_q=q,
        period=s_total,
        closure_defect=defect,
        conserved_drift=traj.conserved_drift,
        c_gamma=traj.c_gamma,
        samples=traj.positions(s),
    )


def find_closed(
    k0_range: tuple[float, float],
    samples: int = 64,
    closure_tol: float = 1e-6,
    max_denominator: int = 20,
    rel_tol: float = 1e-12,
    k0_xtol: float = 1e-13,
) -> list[ClosedCurveResult]:
    """Closed curves with rotation number p/q (q <= max_denominator) inside
    a k0 range.

    The tangent angle swept per curvature period is sampled over the range;
    rational targets come from continued-fraction approximation and each
    bracketed target is refined by bisection on the angle defect.  Returned
    curves are re-integrated over their full period and kept only when the
    measured closure defect passes ``closure_tol``.
    """
    lo, hi = k0_range
    if not (0.0 < lo < hi):
        raise ValueError("need 0 < lo < hi for the k0 range")
    if samples < 8:
        raise ValueError("need at least 8 samples")
    results: list[ClosedCurveResult] = []
    if hi >= 1.0 - 1e-12:
        hi = min(hi, 1.0 - 1e-6)
    grid_k0 = np.linspace(lo, hi, samples)
    w = np.array(
        [curvature_period(k, rel_tol=rel_tol).dphi / (2.0 * np.pi) for k in grid_k0]
    )
    seen: set[tuple[int, int]] = set()
    for a, b, wa, wb in zip(grid_k0[:-1], grid_k0[1:], w[:-1], w[1:]):
        wlo, whi = (wa, wb) if wa <= wb else (wb, wa)
        # rational targets inside this bracket
        targets = set()
        for wmid in (wa, wb, 0.5 * (wa + wb)):
            frac = Fraction(wmid).limit_denominator(max_denominator)
            if wlo < float(frac) < whi:
                targets.add((frac.numerator, frac.denominator))
        for p, q in sorted(targets):
            if (p, q) in seen:
                continue
            seen.add((p, q))
            target = p / q
            f = lambda k: curvature_period(k, rel_tol=rel_tol).dphi / (2.0 * np.pi) - target
            k_star = bisect(f, a, b, xtol=k0_xtol)
            result = verify_closed(k_star, p, q, rel_tol=rel_tol)
            if result.closure_defect <= closure_tol:
                results.append(result)
    results.sort(key=lambda r: r.k0)
    return results


_SNAP_CACHE: dict[float, ClosedCurveResult] = {}


def snap_to_closed(
    k0: float,
    max_denominator: int = 20,
    search_width: float = 0.12,
    rel_tol: float = 1e-12,
) -> ClosedCurveResult:
    """The closed curve whose rotation number is the best small-denominator
    approximation at the requested k0.

    Generic k0 give curves that never close; catalog entries that need a
    compact curve snap to the nearest closed one.  Results are cached per
    requested k0.
    """
    key = round(float(k0), 9)
    if key in _SNAP_CACHE:
        return _SNAP_CACHE[key]
    if abs(k0 - 1.0) < 1e-9:
        result = _circle_result(512, rel_tol)
        _SNAP_CACHE[key] = result
        return result
    w0 = curvature_period(k0, rel_tol=rel_tol).dphi / (2.0 * np.pi)
    frac = Fraction(w0).limit_denominator(max_denominator)
    target = float(frac)
    f = lambda k: curvature_period(k, rel_tol=rel_tol).dphi / (2.0 * np.pi) - target
    # bracket the target outward from the request
    a = b = k0
    fa = fb = w0 - target
    step = 0.02
    while fa * fb >= 0.0:
        if abs(a - k0) > search_width:
            raise NoRootError(
                f"no closed curve with denominator <= {max_denominator} within "
                f"{search_width} of k0={k0}"
            )
        a = max(a - step, 1e-3)
        b = min(b + step, 1.0 - 1e-7)
        fa, fb = f(a), f(b)
    k_star = bisect(f, a, b, xtol=1e-12)
    result = verify_closed(k_star, frac.numerator, frac.denominator, rel_tol=rel_tol)
    _SNAP_CACHE[key] = result
    return result


# ---------------------------------------------------------------------------
# charts from curves
# ---------------------------------------------------------------------------


def closed_curve_chart(
    result: ClosedCurveResult, n_points: int = 1024, rel_tol: float = 1e-12
) -> SampledChart:
    """Periodic chart of a closed curve with derivatives from the ODE state.

    dF = T, d2F = kN come from the dense solution, so chart derivatives are
    accurate to the integrator tolerance independent of the grid spacing.
    Residual seam jumps from the closure defect are blended away linearly.
    """
    if result.is_circle:
        # exact circle, no need to integrate
        theta = 2.0 * np.pi * np.arange(n_points) / n_points
        F = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        dF = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)[:, None, :]
        d2F = (-F)[:, None, None, :]
        grid = ParameterGrid((Axis(n_points, 2.0 * np.pi / n_points, periodic=True),))
        return SampledChart(grid, F, dF, d2F, None, "analytic", name="circle")

    s_total = result.period
    traj = integrate(result.k0, rel_tol=rel_tol, s_max=s_total)
    h = s_total / n_points
    s = h * np.arange(n_points)
    st = traj.state(s)  # (4, N)
    x, y, phi, k = st

    # blend out the closure defect so periodic wrap is exact
    end = traj.state(s_total)
    frac = s / s_total
    x = x - frac * (end[0] - traj.k0)
    y = y - frac * (end[1] - 0.0)
    phi = phi - frac * (end[2] - 0.5 * np.pi - 2.0 * np.pi * result.rotation_p)
    k = k - frac * (end[3] - result.k0)

    F = np.stack([x, y], axis=-1)
    T = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    Nvec = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    dF = T[:, None, :]
    d2F = (k[:, None] * Nvec)[:, None, None, :]
    grid = ParameterGrid((Axis(n_points, h, periodic=True),))
    return SampledChart(
        grid, F, dF, d2F, None, "analytic", name=f"al_curve(k0={result.k0:.6f})"
    )


def open_arc_chart(
    k0: float, n_periods: int = 2, n_points: int = 1024, rel_tol: float = 1e-12
) -> SampledChart:
    """Truncated chart of an open arc of the curve (no closure needed)."""
    per = curvature_period(k0, rel_tol=rel_tol)
    s_total = n_periods * per.period
    traj = integrate(k0, rel_tol=rel_tol, s_max=s_total)
    h = s_total / (n_points - 1)
    s = h * np.arange(n_points)
    st = traj.state(s)
    x, y, phi, k = st
    F = np.stack([x, y], axis=-1)
    dF = np.stack([np.cos(phi), np.sin(phi)], axis=-1)[:, None, :]
    Nvec = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    d2F = (k[:, None] * Nvec)[:, None, None, :]
    grid = ParameterGrid((Axis(n_points, h, periodic=False),))
    return SampledChart(grid, F, dF, d2F, None, "analytic", name=f"al_arc(k0={k0})")


def embed(
    chart: SampledChart,
    target_dim: int,
    rotation: Optional[np.ndarray] = None,
    translation: Optional[np.ndarray] = None,
    orth_tol: float = 1e-12,
) -> SampledChart:
    """Embed a planar chart into R^n through the first-two-coordinates plane
    composed with a rigid motion.

    Rotations preserve the shrinker property; a nonzero translation destroys
    it (the defining equation is centered at the origin) and triggers a
    warning.
    """
    if chart.ambient_dim != 2:
        raise ValueError("embed expects a planar chart (ambient dimension 2)")
    if target_dim < 2:
        raise ValueError("target dimension must be at least 2")
    n = target_dim
    if rotation is None:
        rotation = np.eye(n)
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (n, n):
        raise ValueError(f"rotation must be {n}x{n}")
    if np.abs(rotation.T @ rotation - np.eye(n)).max() > orth_tol:
        raise ValueError("rigid motion must be orthogonal")
    if translation is None:
        translation = np.zeros(n)
    translation = np.asarray(translation, dtype=float)
    if np.linalg.norm(translation) > 0:
        warnings.warn(
            "translation moves the curve off-center: the shrinker property "
            "H = -F_perp is destroyed",
            stacklevel=2,
        )

    E = np.zeros((2, n))
    E[0, 0] = E[1, 1] = 1.0

    def push(arr):
        return np.einsum("...a,ab,cb->...c", arr, E, rotation)

    F = push(chart.F) + translation
    dF = push(chart.dF)
    d2F = push(chart.d2F)
    d3F = push(chart.d3F) if chart.d3F is not None else None
    return SampledChart(
        chart.grid, F, dF, d2F, d3F, chart.derivative_source, name=f"{chart.name}_in_R{n}"
    )
