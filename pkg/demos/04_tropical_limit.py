"""
Tropical limits
===============

Scaling x = lam * x* and letting lam grow, F / lam^d approaches the max of
the f_a.  The geometry collapses onto the cells of the tropical
hypersurface: flat cells, curved edges.
"""

import numpy as np

from statgeo import SuperIdealModel
from statgeo.perturb import example2_model
from statgeo import tropical as trop

# Degree one: F/lam approaches max(x*) with a gap below ln(n)/lam.
model = SuperIdealModel(3)
t = trop.lambda_sweep(model, [0.2, 1.0, -0.5], None, (4, 8, 16, 32, 64), "F")
for lam, raw, norm, pred, gap in t.rows():
    print(f"lam = {lam:>4.0f}   F/lam = {norm:.6f}   max = {pred:.1f}   gap = {gap:.2e}  (ln 3/lam = {np.log(3) / lam:.2e})")

# On an r-fold edge the curvature is that of r equal weights.
for r in (2, 3, 4):
    x = np.r_[np.ones(r), np.zeros(5 - r)]
    m = SuperIdealModel(5)
    tt = trop.tropical_tensors_uniform(m, trop.tropical_eval(m, x))
    print(f"r = {r}: R = {tt['scalar_R']:.6f}  formula {trop.r_edge_curvatures(r)['scalar_R']:.6f}")

# A mixed model: affine part plus quadratic couplings.  The double-scaling
# limit sees only the quadratic part; the finite-lambda corrections are
# O(1/lam) and extrapolate away.
mixed = example2_model(1.0)
sweep = trop.lambda_sweep(mixed, [1.0, 2.0, 1.0], None, (16, 32, 64, 128, 256), "g12")
print()
for lam, raw, norm, pred, gap in sweep.rows():
    print(f"lam = {lam:>5.0f}   g12 = {norm:.6f}   limit {pred:.1f}   gap {gap:.3e}")
print(f"extrapolated g12 = {float(sweep.extrapolated):.10f}")
ds = trop.double_scaling_tensors(mixed, [1.0, 2.0, 2.0])
print(f"at (1,2,2): sector {ds.sector}, r = {ds.r}, K = {ds.K:.4f}")
