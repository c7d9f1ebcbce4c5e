"""
A reaction that changes sign forces level crossings to be separated by zeros.

With f = cos(t) and u0 = 2 the solution is u = 2 + sin(t). The level 2.5
is met at pi/6, 5pi/6 and 13pi/6, and between the first and the third
crossing the reaction must vanish somewhere. The probe finds t = pi/2.
The sign checker, for its part, reports that f never settles on a sign.
"""
import math

from rdlab import Grid, Problem, ReactionSpec, StepperConfig, lemma1_probe, simulate
from rdlab.diagnostics import check_sign_condition

grid = Grid.interval(1.0, 65)
res = simulate(Problem(grid, ReactionSpec.scalar("cos(t)"), grid.constant(2.0), 7.0), StepperConfig(stride=1))

probe = lemma1_probe(res.record, 2.5)
print(f"status: {probe.status}")
for k, c in enumerate(probe.crossings[:3]):
    print(f"  crossing {k + 1}: t = {c['t']:.6f}")
w = probe.witness
print(f"reaction zero at t = {w['t']:.9f} (pi/2 = {math.pi / 2:.9f}), f = {w['f']:.1e}")

sign = check_sign_condition(res.trace)
print(f"\nsign condition: {sign.verdict}; changes near "
      + ", ".join(f"{t:.3f}" for t in sign.details["sign_changes"][:4]))
