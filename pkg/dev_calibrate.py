"""Dev calibration: sphere closed forms, Gauss index order, ricci sign."""
import numpy as np

from shrinklab.grid import ParameterGrid, periodic_axis, truncated_axis
from shrinklab.chart import ImmersionMap, evaluate_chart
from shrinklab.tensors import compute_fields
from shrinklab.structure import structure_residual, intrinsic_riemann, normal_curvature_commutator


def sphere2_map(r=np.sqrt(2.0)):
    def pos(x):
        u, v = x[..., 0], x[..., 1]
        return r * np.stack([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)], axis=-1)

    def jac(x):
        u, v = x[..., 0], x[..., 1]
        du = r * np.stack([np.cos(u) * np.cos(v), np.cos(u) * np.sin(v), -np.sin(u)], axis=-1)
        dv = r * np.stack([-np.sin(u) * np.sin(v), np.sin(u) * np.cos(v), np.zeros_like(u)], axis=-1)
        return np.stack([du, dv], axis=-2)

    def hess(x):
        u, v = x[..., 0], x[..., 1]
        duu = r * np.stack([-np.sin(u) * np.cos(v), -np.sin(u) * np.sin(v), -np.cos(u)], axis=-1)
        duv = r * np.stack([-np.cos(u) * np.sin(v), np.cos(u) * np.cos(v), np.zeros_like(u)], axis=-1)
        dvv = r * np.stack([-np.sin(u) * np.cos(v), -np.sin(u) * np.sin(v), np.zeros_like(u)], axis=-1)
        row_u = np.stack([duu, duv], axis=-2)
        row_v = np.stack([duv, dvv], axis=-2)
        return np.stack([row_u, row_v], axis=-3)

    return ImmersionMap(pos, jac, hess, name="sphere2")


grid = ParameterGrid((truncated_axis(48, 0.35, np.pi - 0.35), periodic_axis(96)))
chart = evaluate_chart(sphere2_map(), grid)
f = compute_fields(chart)
interior = grid.interior_mask()

# closed-form metric g = diag(2, 2 sin^2 u)
u = grid.coords()[..., 0]
g_exact = np.zeros(grid.shape + (2, 2))
g_exact[..., 0, 0] = 2.0
g_exact[..., 1, 1] = 2.0 * np.sin(u) ** 2
print("metric err:", np.abs(f.metric.g - g_exact)[interior].max())

# H = -F pointwise, |H| = sqrt(2)... |H| = m/r = 2/sqrt2 = sqrt2
print("|H|-sqrt2:", np.abs(f.sff.norm_H - np.sqrt(2))[interior].max())
print("H+F:", np.abs(f.sff.H + chart.F)[interior].max())

# normality <F_k, A_ij> = 0
norm_def = np.einsum("...ka,...ija->...kij", chart.dF, f.sff.A)
print("normality:", np.abs(norm_def)[interior].max())

# ricci trace
print("ricci-(P-Q):", np.abs(f.derived.ricci - f.derived.P + f.derived.Q)[interior].max())

# Ricci curvature should be (1/2) g  (constant curvature 1/r^2 = 1/2, m=2: Ric = (m-1)K g)
print("Ric-0.5g:", np.abs(f.derived.ricci - 0.5 * f.metric.g)[interior].max())

# |Rperp|^2 identity vs 2|Q|^2 - 2 S_ikjl S^ijkl
ginv = f.metric.ginv
S = f.derived.S
Sup = np.einsum("...ia,...jb,...kc,...ld,...abcd->...ijkl", ginv, ginv, ginv, ginv, S)
cross = np.einsum("...ikjl,...ijkl->...", S, Sup)
alg = 2 * f.derived.normsq_Q - 2 * cross
print("|Rperp|^2 - alg:", np.abs(f.derived.normsq_rperp - alg)[interior].max())

# gauss residual: intrinsic (FD) vs quadratic form
rint = intrinsic_riemann(f)
rg = f.derived.riemann
print("gauss resid (as implemented):", np.abs(rint - rg)[interior].max())
print("gauss resid (sign flipped):  ", np.abs(rint + rg)[interior].max())
print("R_gauss[1212] sample:", rg[24, 48, 0, 1, 0, 1], " intr:", rint[24, 48, 0, 1, 0, 1])

# nabla_perp H and nabla_perp nu should vanish
print("nabla_perp_H:", np.abs(f.nder.nabla_perp_H)[interior].max())
print("nabla_perp_nu:", np.abs(f.nder.nabla_perp_nu)[interior].max())

# structure reports
for kind in ("gauss", "codazzi", "ricci", "ricci_trace", "simons_scalar"):
    rep = structure_residual(kind, f)
    print(f"{kind:14s} max={rep.max:.3e} mean={rep.mean:.3e}")

# --- generic chart with nonzero normal curvature: calibrate ricci sign ---
def twisty_map():
    def pos(x):
        u, v = x[..., 0], x[..., 1]
        return np.stack(
            [
                np.cos(u),
                np.sin(u),
                np.cos(v),
                np.sin(v),
                0.3 * np.cos(u + v),
                0.3 * np.sin(u - v),
            ],
            axis=-1,
        )

    return ImmersionMap(pos, name="twisty")


g2 = ParameterGrid((periodic_axis(96), periodic_axis(96)))
c2 = evaluate_chart(twisty_map(), g2)
f2 = compute_fields(c2)
comm = normal_curvature_commutator(f2)
w = f2.derived.rperp
i2 = g2.interior_mask()
print("twisty |rperp| scale:", np.abs(w)[i2].max())
print("comm - wedge:", np.abs(comm - w)[i2].max())
print("comm + wedge:", np.abs(comm + w)[i2].max())
