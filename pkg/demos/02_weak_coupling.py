"""
Weakly coupled subsystems
=========================

Two independent two-level systems give a product family whose Hessian of F
is block diagonal with singular blocks, so K = 0.  Switching on a coupling
eps * gamma leaves K flat to first order; the response starts at eps^2.
"""

import numpy as np

from statgeo import SubsystemModel, full_report
from statgeo.perturb import (
    EXAMPLE2_SOURCES,
    EpsilonFamily,
    epsilon_series,
    example2_second_order_K,
    verify_prop3,
)

model = SubsystemModel(q=(2, 2), c=(1.0, 0.7), gamma="x1*x2")
x = np.array([0.3, -0.1, 0.5, 0.2])

for eps in (0.0, 1e-3, 1e-2, 1e-1):
    K = full_report(model.with_epsilon(eps), x).gauss_kronecker_K
    print(f"eps = {eps:<6} K = {K: .3e}")

rep = verify_prop3(model, x)
print(f"series: c1 = {rep['c1_K']:.2e}, c2 = {rep['c2_K']:.4e}")

# The two-state example with couplings x1*x2 and x1*x3 has a closed-form
# second-order coefficient that does not depend on x1.
fam = EpsilonFamily.from_expressions(EXAMPLE2_SOURCES, 3, quantity="K")
for x1 in (-1.0, 0.0, 2.0):
    pt = np.array([x1, 0.4, -0.3])
    est = epsilon_series(fam, pt)
    print(f"x1 = {x1:>4}: c2 numeric {est.c2:.8f}   closed form {example2_second_order_K(pt):.8f}")
