"""Hairs of e^z - 2 and the separating set B in logarithmic coordinates.

Endpoints come from pulling z = 10 back along an external address.  The
constant-0 address lands on the repelling fixed point 1.146...  The witness
rasterises B for the transform of (e^z - 2) / e^6.  It then shows that the
component of the complement through the lifted fixed point is an island
bounded by B.

    python demos/hairs_and_witness.py [outdir]
"""
import math
import sys
from pathlib import Path

import numpy as np

from transdyn.catalog import expaffine
from transdyn.dynamics import modulus_ladder
from transdyn.grid import RasterGrid, write_ppm
from transdyn.hairs import classify_endpoint, parse_address, trace_hair
from transdyn.logtransform import make_setup
from transdyn.witness import separation_witness

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

lad = modulus_ladder(expaffine(-2))
for text in ("0", "0,1", "1|-1,2"):
    h = trace_hair(-2.0, parse_address(text), depth=3, t_samples=16)
    c = classify_endpoint(-2.0, h, lad)
    print(f"address {str(h.address):>8}: endpoint {h.endpoint:.10f}, gap {h.convergence_gap:.1e}, {c.label.value}")

setup = make_setup(expaffine(-2), math.exp(6))
rep = separation_witness(setup, 0.1, 20.0, RasterGrid(0 + 4j, 24 - 4j, 512, 512))
palette = np.array([[255, 255, 255], [150, 150, 150], [0, 0, 0]], np.uint8)
write_ppm(out / "witness.ppm", palette[rep.grid.labels])
ii, jj = np.nonzero(rep.island)
xs = rep.grid.xs()
print(f"query {rep.query.real:.4f}: island of {ii.size} pixels, Re w in [{xs[jj.min()]:.2f}, {xs[jj.max()]:.2f}]")
print(f"bounded: {rep.bounded}; rim pixels all in B: {rep.boundary_ok}; flags {rep.flags}")
