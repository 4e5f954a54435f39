"""Three views of g(z) = lambda z^2 exp(z - z^2) as lambda crosses 1.

At lambda = 0.995 only the superattracting basin of 0 is visible.  At
lambda = 1 a parabolic fixed point sits at 1 and its basin renders black.
At lambda = 1.1 it has split off an attracting fixed point near 1.258 with
its own basin.

    python demos/quadexp_views.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from transdyn.catalog import quadexp, singular_values
from transdyn.dynamics import find_attractors
from transdyn.grid import RasterGrid, write_ppm
from transdyn.topology import escaping_fraction, render_classification, to_rgb

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
window = (complex(-0.35, 1.2), complex(2.23, -1.2))

for lam in (0.995, 1.0, 1.1):
    spec = quadexp(lam)
    atts = find_attractors(spec)
    grid = render_classification(spec, RasterGrid(*window, 800, 667), atts, budget=200)
    write_ppm(out / f"quadexp_{lam}.ppm", to_rgb(grid.labels))
    print(f"lambda = {lam}")
    for a in atts:
        if a.kind != "repelling" and a.period == 1 and abs(a.cycle[0].imag) < 1e-9:
            print(f"  {a.kind:>16} fixed point {a.cycle[0].real:.10f}, multiplier {abs(a.multiplier):.3g}")
    codes = sorted(int(c) for c in np.unique(grid.labels) if c >= 2)
    print(f"  basin codes in view: {codes}; escaping fraction {escaping_fraction(grid):.4f}")

cv = sorted(v.real for v in singular_values(quadexp(1.1)).critical_values)
print("critical values at lambda = 1.1:", ", ".join(f"{v:.6f}" for v in cv))
print("images written to", out)
