"""Dev: refinement ratios for structure residuals on the sphere."""
import numpy as np

from shrinklab.grid import ParameterGrid, periodic_axis, truncated_axis
from shrinklab.chart import ImmersionMap, evaluate_chart
from shrinklab.tensors import compute_fields
from shrinklab.structure import structure_residual

from dev_calibrate import sphere2_map


def run(grid, analytic=True):
    imm = sphere2_map()
    if not analytic:
        imm = ImmersionMap(imm.position, name="sphere2_fd")
    chart = evaluate_chart(imm, grid)
    f = compute_fields(chart)
    return {k: structure_residual(k, f).max for k in ("gauss", "codazzi", "ricci", "simons_scalar")}


base = ParameterGrid((truncated_axis(49, 0.35, np.pi - 0.35), periodic_axis(96)))
fine = base.refine()
finer = fine.refine()
for analytic in (True, False):
    a = run(base, analytic)
    b = run(fine, analytic)
    c = run(finer, analytic)
    print("analytic" if analytic else "fd-source")
    for k in a:
        print(f"  {k:14s} {a[k]:.3e} -> {b[k]:.3e} -> {c[k]:.3e}  ratios {a[k]/b[k]:.2f} {b[k]/c[k]:.2f}")
