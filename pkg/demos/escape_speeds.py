"""Fast and slow escape, side by side.

Fatou's function z + 1 + e^{-z} pushes z = 100 right by one unit per step,
which is far too slow to keep up with the iterated maximum modulus.  e^z - 2
started at 10 outruns it at once.  The semiconjugacy pi(z) = e^{-z} maps Fatou's
function onto w e^{-w - 1}, which has an attracting fixed point at 0.

    python demos/escape_speeds.py
"""
from transdyn.catalog import expaffine, fatou
from transdyn.cli import semiconj_check
from transdyn.dynamics import classify_escape, iterate_orbit, modulus_ladder

for spec, z in ((fatou(), 100 + 0j), (expaffine(-2), 10 + 0j)):
    lad = modulus_ladder(spec, depth=6)
    orb = iterate_orbit(spec, z, budget=4)
    c = classify_escape(spec, z, lad)
    print(spec)
    print("  ladder (tier, value):", [(lv.tier, round(lv.value, 4)) for lv in lad.levels[:4]])
    print("  log|f^n(z)|:        ", [round(float(x), 4) for x in orb.log_moduli[:5]])
    print("  class:", c.label.value, "" if c.ell is None else f"(offset {c.ell})")

rep = semiconj_check(-1.0, 100)
print(f"pi o f = g o pi: max residual {rep['max_residual']:.2e}, g'(0) = {rep['g_prime_0']:.6f}")
