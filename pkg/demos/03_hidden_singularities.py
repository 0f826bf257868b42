"""
Visible and hidden singularities
================================

Kinks in the f_a surface as discontinuities of the metric or of Hess F
along a path.  Sometimes the Gauss-Kronecker curvature notices, sometimes
it is blind to them.
"""

from statgeo.singular import builtin_example, classify

for key, params in [("1", {}), ("2", {}), ("3a", {}), ("3a", {"hess_zero": True}), ("3b", {}), ("3c", {})]:
    spec = builtin_example(key, **params)
    ev = classify(spec, spec.exclude[0])
    K = ev.quantities["K"]
    det = ev.quantities["det_g"]
    label = key + (" (flat y-family)" if params else "")
    print(f"{label:<18} order {ev.order}  {ev.visibility:<8} det_g: {det.kind:<10} K: {K.kind:<10}"
          f" K left/right = {K.left:.3g} / {K.right:.3g}")

# The refinement trace shows how the one-sided limits settle.
ev = classify(builtin_example("3c"), 0.0)
print()
print("\n".join(ev.trace_csv().splitlines()[:5]))
