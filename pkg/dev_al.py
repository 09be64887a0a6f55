"""Dev: Abresch-Langer integration, period map, closed-curve search."""
import time

import numpy as np

from shrinklab.alcurve import (
    integrate,
    critical_values,
    curvature_period,
    find_closed,
    closed_curve_chart,
    CONSERVED_MAX,
)
from shrinklab.tensors import compute_fields

print("exp(-1/2) =", CONSERVED_MAX)

# conservation over arclength 50
for k0 in (0.4, 0.7, 0.95, 1.0, 1.5):
    t0 = time.time()
    traj = integrate(k0, rel_tol=1e-10, s_max=50.0)
    print(f"k0={k0}: drift={traj.conserved_drift:.3e}  ({time.time()-t0:.2f}s)")

# critical values
lo, hi = critical_values(0.55)
print("c=0.55 roots:", lo, hi, "check:", lo * np.exp(-lo**2 / 2), hi * np.exp(-hi**2 / 2))

# extrema along trajectory vs critical_values
traj = integrate(0.7, rel_tol=1e-12, s_max=30.0)
k_ext = [float(traj.state(s)[3]) for s in traj.critical_s[:4]]
roots = critical_values(traj.c_gamma)
print("observed extrema:", k_ext, "roots:", roots)

# period map
print("rotation number w(k0) = dphi/2pi:")
for k0 in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99):
    per = curvature_period(k0, rel_tol=1e-10)
    print(f"  k0={k0:5.2f}  P={per.period:8.5f}  dphi={per.dphi:8.5f}  w={per.dphi/2/np.pi:.6f}  kmax={per.k_extrema[1]:.5f}")

# closed search
t0 = time.time()
res = find_closed((0.3, 0.99), samples=48, closure_tol=1e-6, rel_tol=1e-12)
print(f"find_closed took {time.time()-t0:.1f}s, found {len(res)}:")
for r in res:
    print(f"  k0={r.k0:.8f} p/q={r.rotation_p}/{r.rotation_q} period={r.period:.5f} defect={r.closure_defect:.2e}")

if res:
    r = res[0]
    chart = closed_curve_chart(r, n_points=512)
    f = compute_fields(chart)
    resid = np.linalg.norm(f.sff.H + f.sff.F_perp, axis=-1)
    print("chart shrinker residual:", resid.max())
