"""Per-point tensor fields of a sampled immersion.

Everything is computed in coordinates with numpy einsum; grid axes stay as
leading batch dimensions.  Tangent indices are raised/lowered with the
induced metric, ambient indices are Cartesian.

The normal bundle is handled frame-free: covariant derivatives of
normal-valued tensors are plain parameter derivatives of the sampled field,
projected back onto the normal bundle, minus Christoffel terms for the
tangent slots.  No explicit normal frame is ever built (frames need not
exist globally), except for the codimension-2 torsion form where a binormal
is constructed locally with sign propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chart import SampledChart
from .grid import ParameterGrid, grid_derivative, grid_gradient

H_THRESHOLD_REL = 1e-8


class DegenerateMetricError(ValueError):
    """Induced metric not invertible at an interior point."""


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------


@dataclass
class MetricField:
    g: np.ndarray          # (..., m, m)
    ginv: np.ndarray       # (..., m, m)
    christoffel: np.ndarray  # (..., k, i, j) = Gamma^k_ij
    sqrt_det: np.ndarray   # (...,)
    dg: np.ndarray         # (..., a, b, c) = d_a g_bc


def first_fundamental(chart: SampledChart) -> MetricField:
    """Induced metric, inverse, Christoffel symbols and volume density.

    The metric derivative d_a g_bc = <F_ab, F_c> + <F_b, F_ac> is assembled
    algebraically from dF and d2F, so the Christoffel symbols carry no
    finite-difference error on analytic charts.
    """
    dF, d2F = chart.dF, chart.d2F
    g = np.einsum("...ia,...ja->...ij", dF, dF)
    det = np.linalg.det(g)
    interior = chart.grid.interior_mask()
    bad = (det <= 0.0) & interior
    if np.any(bad):
        idx = tuple(int(v[0]) for v in np.nonzero(bad))
        raise DegenerateMetricError(
            f"induced metric of '{chart.name}' is degenerate at grid index {idx}"
        )
    ginv = np.linalg.inv(g)
    dg = np.einsum("...abx,...cx->...abc", d2F, dF) + np.einsum(
        "...bx,...acx->...abc", dF, d2F
    )
    gamma = 0.5 * np.einsum(
        "...kl,...ilj->...kij",
        ginv,
        dg + np.einsum("...jli->...ilj", dg) - np.einsum("...lij->...ilj", dg),
    )
    return MetricField(g=g, ginv=ginv, christoffel=gamma, sqrt_det=np.sqrt(np.abs(det)), dg=dg)


# ---------------------------------------------------------------------------
# second fundamental form
# ---------------------------------------------------------------------------


@dataclass
class SFFField:
    A: np.ndarray          # (..., i, j, a)
    H: np.ndarray          # (..., a)
    norm_H: np.ndarray     # (...,)
    nu: np.ndarray         # (..., a); zero where undefined
    nu_mask: np.ndarray    # (...,) bool, True where |H| > threshold
    theta: np.ndarray      # (..., i) = <F, F_i>
    F_tan: np.ndarray      # (..., a)
    F_perp: np.ndarray     # (..., a)
    h_threshold: float


def second_fundamental(
    chart: SampledChart,
    metric: MetricField,
    h_threshold_rel: float = H_THRESHOLD_REL,
) -> SFFField:
    """A = d2F - Gamma.dF, mean curvature, principal normal and F splitting.

    The principal normal is defined only where |H| exceeds a relative
    threshold of the grid maximum; elsewhere it is masked, not an error.
    """
    A = chart.d2F - np.einsum("...kij,...ka->...ija", metric.christoffel, chart.dF)
    H = np.einsum("...ij,...ija->...a", metric.ginv, A)
    norm_H = np.linalg.norm(H, axis=-1)
    interior = chart.grid.interior_mask()
    hmax = float(norm_H[interior].max()) if np.any(interior) else float(norm_H.max())
    h_threshold = h_threshold_rel * hmax
    nu_mask = norm_H > h_threshold
    nu = np.zeros_like(H)
    np.divide(H, norm_H[..., None], out=nu, where=nu_mask[..., None])
    theta = np.einsum("...a,...ia->...i", chart.F, chart.dF)
    F_tan = np.einsum("...i,...ij,...ja->...a", theta, metric.ginv, chart.dF)
    F_perp = chart.F - F_tan
    return SFFField(
        A=A,
        H=H,
        norm_H=norm_H,
        nu=nu,
        nu_mask=nu_mask,
        theta=theta,
        F_tan=F_tan,
        F_perp=F_perp,
        h_threshold=h_threshold,
    )


# ---------------------------------------------------------------------------
# derived algebraic tensors
# ---------------------------------------------------------------------------


@dataclass
class DerivedField:
    P: np.ndarray            # (..., i, j) = <H, A_ij>
    Q: np.ndarray            # (..., i, j) = <A_i^k, A_kj>
    S: np.ndarray            # (..., i, j, k, l) = <A_ij, A_kl>
    riemann: np.ndarray      # (..., i, j, k, l), Gauss equation
    ricci: np.ndarray        # (..., i, j)
    rperp: np.ndarray        # (..., i, j, a, b) ambient-valued 2-form A_ik ^ A^k_j
    normsq_A: np.ndarray
    normsq_P: np.ndarray
    normsq_Q: np.ndarray
    normsq_S: np.ndarray
    normsq_rperp: np.ndarray
    inner_PQ: np.ndarray
    trace_P: np.ndarray
    tau: Optional[np.ndarray] = None  # (..., i); codimension 2 only


def derived_tensors(sff: SFFField, metric: MetricField) -> DerivedField:
    """P, Q, S, curvature tensors of Gauss/Ricci type and their norms.

    The normal curvature is stored as the ambient-valued wedge
    rperp[..., i, j, a, b] = A_ik^a A_j^{k b} - A_ik^b A_j^{k a}; its norm
    then satisfies |R_perp|^2 = 2|Q|^2 - 2 S_ikjl S^ijkl identically, which
    pins down the wedge convention.
    """
    A, H, ginv = sff.A, sff.H, metric.ginv
    P = np.einsum("...a,...ija->...ij", H, A)
    Amix = np.einsum("...kl,...jla->...jka", ginv, A)  # A_j^{k} (..., j, k, a)
    Q = np.einsum("...ika,...jka->...ij", A, Amix)
    S = np.einsum("...ija,...kla->...ijkl", A, A)
    riemann = np.einsum("...ikjl->...ijkl", S) - np.einsum("...iljk->...ijkl", S)
    ricci = np.einsum("...kl,...ikjl->...ij", ginv, riemann)
    rperp = np.einsum("...ika,...jkb->...ijab", A, Amix) - np.einsum(
        "...ikb,...jka->...ijab", A, Amix
    )

    up2 = lambda T: np.einsum("...ik,...jl,...kl->...ij", ginv, ginv, T)
    normsq_P = np.einsum("...ij,...ij->...", P, up2(P))
    normsq_Q = np.einsum("...ij,...ij->...", Q, up2(Q))
    inner_PQ = np.einsum("...ij,...ij->...", P, up2(Q))
    normsq_A = np.einsum("...ik,...jl,...ija,...kla->...", ginv, ginv, A, A)
    Sup = np.einsum("...ia,...jb,...kc,...ld,...abcd->...ijkl", ginv, ginv, ginv, ginv, S)
    normsq_S = np.einsum("...ijkl,...ijkl->...", S, Sup)
    normsq_rperp = np.einsum(
        "...ijab,...ik,...jl,...klab->...", rperp, ginv, ginv, rperp
    )
    trace_P = np.einsum("...ij,...ij->...", ginv, P)
    return DerivedField(
        P=P,
        Q=Q,
        S=S,
        riemann=riemann,
        ricci=ricci,
        rperp=rperp,
        normsq_A=normsq_A,
        normsq_P=normsq_P,
        normsq_Q=normsq_Q,
        normsq_S=normsq_S,
        normsq_rperp=normsq_rperp,
        inner_PQ=inner_PQ,
        trace_P=trace_P,
    )


# ---------------------------------------------------------------------------
# normal-bundle derivatives
# ---------------------------------------------------------------------------


def normal_projector(chart: SampledChart, metric: MetricField) -> np.ndarray:
    """Pointwise projector onto the normal bundle, shape (..., n, n)."""
    n = chart.ambient_dim
    proj = np.einsum("...ia,...ij,...jb->...ab", chart.dF, metric.ginv, chart.dF)
    return np.eye(n) - proj


@dataclass
class NormalDerivativeField:
    nabla_perp_A: np.ndarray   # (..., i, j, k, a)
    nabla_perp_H: np.ndarray   # (..., i, a)
    nabla_perp_nu: np.ndarray  # (..., i, a); masked by sff.nu_mask
    grad_norm_H: np.ndarray    # (..., i)
    grad_theta: np.ndarray     # (..., i, j) = nabla_i theta_j (algebraic)
    hess_perp_H: np.ndarray    # (..., i, j, a)
    lap_perp_H: np.ndarray     # (..., a)
    normsq_nabla_A: np.ndarray
    normsq_nabla_H: np.ndarray
    lap_normsq_A: np.ndarray
    lap_normsq_H: np.ndarray
    projector: np.ndarray      # (..., a, b)


def covariant_derivative_2tensor(
    T: np.ndarray, metric: MetricField, grid: ParameterGrid
) -> np.ndarray:
    """nabla_i T_jk for a scalar-valued symmetric 2-tensor field."""
    dT = grid_gradient(T, grid)
    gam = metric.christoffel
    return (
        dT
        - np.einsum("...lij,...lk->...ijk", gam, T)
        - np.einsum("...lik,...jl->...ijk", gam, T)
    )


def laplace_beltrami(u: np.ndarray, metric: MetricField, grid: ParameterGrid) -> np.ndarray:
    """Scalar Laplacian in divergence form with central differences."""
    grad = grid_gradient(u, grid)
    flux = metric.sqrt_det[..., None] * np.einsum("...jk,...k->...j", metric.ginv, grad)
    div = np.zeros_like(u)
    for j in range(grid.ndim):
        div = div + grid_derivative(flux[..., j], grid, j)
    return div / metric.sqrt_det


def normal_derivatives(
    chart: SampledChart, metric: MetricField, sff: SFFField
) -> NormalDerivativeField:
    """Normal covariant derivatives of A, H, nu plus the scalar Laplacians.

    The parameter derivative of each sampled tensor field is taken with
    central differences, then projected onto the normal bundle and corrected
    with Christoffel terms for tangent slots.
    """
    grid = chart.grid
    ginv, gam = metric.ginv, metric.christoffel
    proj = normal_projector(chart, metric)

    dA = grid_gradient(sff.A, grid)  # (..., i, j, k, a)
    nabla_perp_A = (
        np.einsum("...ab,...ijkb->...ijka", proj, dA)
        - np.einsum("...lij,...lka->...ijka", gam, sff.A)
        - np.einsum("...lik,...jla->...ijka", gam, sff.A)
    )

    dH = grid_gradient(sff.H, grid)  # (..., i, a)
    nabla_perp_H = np.einsum("...ab,...ib->...ia", proj, dH)

    grad_norm_H = grid_gradient(sff.norm_H, grid)

    # product rule H = |H| nu  =>  nabla_perp nu = (nabla_perp H - grad|H| nu)/|H|
    nabla_perp_nu = np.zeros_like(nabla_perp_H)
    num = nabla_perp_H - grad_norm_H[..., None] * sff.nu[..., None, :]
    np.divide(
        num,
        sff.norm_H[..., None, None],
        out=nabla_perp_nu,
        where=sff.nu_mask[..., None, None],
    )

    # nabla_i theta_j = g_ij + <F, A_ij>, assembled without finite differences
    grad_theta = metric.g + np.einsum("...a,...ija->...ij", chart.F, sff.A)

    dTH = grid_gradient(nabla_perp_H, grid)  # (..., i, j, a)
    hess_perp_H = np.einsum("...ab,...ijb->...ija", proj, dTH) - np.einsum(
        "...lij,...la->...ija", gam, nabla_perp_H
    )
    lap_perp_H = np.einsum("...ij,...ija->...a", ginv, hess_perp_H)

    normsq_nabla_A = np.einsum(
        "...ip,...jq,...kr,...ijka,...pqra->...",
        ginv, ginv, ginv, nabla_perp_A, nabla_perp_A,
    )
    normsq_nabla_H = np.einsum(
        "...ij,...ia,...ja->...", ginv, nabla_perp_H, nabla_perp_H
    )

    normsq_A = np.einsum("...ik,...jl,...ija,...kla->...", ginv, ginv, sff.A, sff.A)
    lap_normsq_A = laplace_beltrami(normsq_A, metric, grid)
    lap_normsq_H = laplace_beltrami(sff.norm_H**2, metric, grid)

    return NormalDerivativeField(
        nabla_perp_A=nabla_perp_A,
        nabla_perp_H=nabla_perp_H,
        nabla_perp_nu=nabla_perp_nu,
        grad_norm_H=grad_norm_H,
        grad_theta=grad_theta,
        hess_perp_H=hess_perp_H,
        lap_perp_H=lap_perp_H,
        normsq_nabla_A=normsq_nabla_A,
        normsq_nabla_H=normsq_nabla_H,
        lap_normsq_A=lap_normsq_A,
        lap_normsq_H=lap_normsq_H,
        projector=proj,
    )


def second_normal_derivative_A(
    nder: NormalDerivativeField, metric: MetricField, sff: SFFField, grid: ParameterGrid
) -> np.ndarray:
    """nabla_perp_k nabla_perp_l A_ij, shape (..., k, l, i, j, a)."""
    U = nder.nabla_perp_A  # (..., l, i, j, a)
    gam = metric.christoffel
    dU = grid_gradient(U, grid)  # (..., k, l, i, j, a)
    return (
        np.einsum("...ab,...klijb->...klija", nder.projector, dU)
        - np.einsum("...mkl,...mija->...klija", gam, U)
        - np.einsum("...mki,...lmja->...klija", gam, U)
        - np.einsum("...mkj,...lima->...klija", gam, U)
    )


# ---------------------------------------------------------------------------
# torsion form (codimension 2)
# ---------------------------------------------------------------------------


@dataclass
class TorsionData:
    tau: np.ndarray        # (..., i)
    binormal: np.ndarray   # (..., a)
    dtau: np.ndarray       # (..., i, j) = d_i tau_j - d_j tau_i
    rperp_scalar: np.ndarray  # (..., i, j) = <b, R_perp_ij nu>


def _propagate_sign(b: np.ndarray, grid: ParameterGrid) -> np.ndarray:
    """Flip signs of a unit field so it varies continuously along axes."""
    b = b.copy()
    flat = b.reshape(-1, b.shape[-1])
    # propagate along raveled order: compare with previous point
    for i in range(1, flat.shape[0]):
        if np.dot(flat[i], flat[i - 1]) < 0.0:
            flat[i] = -flat[i]
    return flat.reshape(b.shape)


def torsion_form(
    chart: SampledChart,
    metric: MetricField,
    sff: SFFField,
    derived: DerivedField,
    nder: NormalDerivativeField,
) -> TorsionData:
    """tau(X) = <nabla_perp_X nu, b> with the binormal b, codimension 2 only."""
    if chart.codimension != 2:
        raise ValueError("torsion form requires codimension exactly 2")
    proj = nder.projector
    # binormal: unit normal orthogonal to nu, sign-propagated over the grid
    n = chart.ambient_dim
    seeds = np.einsum("...ab,cb->...ca", proj, np.eye(n))  # projected ambient basis
    seeds = seeds - np.einsum("...ca,...a,...b->...cb", seeds, sff.nu, sff.nu)
    norms = np.linalg.norm(seeds, axis=-1)
    pick = np.argmax(norms, axis=-1)
    b = np.take_along_axis(seeds, pick[..., None, None], axis=-3)[..., 0, :]
    b = b / np.maximum(np.linalg.norm(b, axis=-1)[..., None], 1e-300)
    b = _propagate_sign(b, chart.grid)

    tau = np.einsum("...ia,...a->...i", nder.nabla_perp_nu, b)
    dtau_full = grid_gradient(tau, chart.grid)  # (..., i, j)
    dtau = dtau_full - np.einsum("...ij->...ji", dtau_full)
    rperp_scalar = np.einsum("...a,...ijab,...b->...ij", b, derived.rperp, sff.nu)
    return TorsionData(tau=tau, binormal=b, dtau=dtau, rperp_scalar=rperp_scalar)


# ---------------------------------------------------------------------------
# bundled pipeline
# ---------------------------------------------------------------------------


@dataclass
class GeometryFields:
    """All tensor fields of a chart, computed in one pass."""

    chart: SampledChart
    metric: MetricField
    sff: SFFField
    derived: DerivedField
    nder: NormalDerivativeField


def compute_fields(chart: SampledChart, h_threshold_rel: float = H_THRESHOLD_REL) -> GeometryFields:
    metric = first_fundamental(chart)
    sff = second_fundamental(chart, metric, h_threshold_rel)
    derived = derived_tensors(sff, metric)
    nder = normal_derivatives(chart, metric, sff)
    return GeometryFields(chart=chart, metric=metric, sff=sff, derived=derived, nder=nder)
