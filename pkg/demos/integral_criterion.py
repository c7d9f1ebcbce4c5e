"""
For spatially homogeneous data, blow-up of u' = f(u) hinges on whether
the integral of ds/(1 + f(s)) over [0, inf) is finite.

The classifier sums the integral over doubling segments up to 1e12 and
reads the shape of the increments. Tails that decay too slowly to judge
from there come back as "inconclusive" rather than as a guess.
"""
from rdlab import classify_criterion

cases = ["s^2", "exp(s)", "s^3", "s", "s^0.5", "s*ln(1+s)", "s*ln(1+s)^2", "s^1.5"]
print(f"{'f(s)':<14} {'verdict':<13} {'estimate':>14}  reason")
for f in cases:
    v = classify_criterion(f, 0.0)
    print(f"{f:<14} {v.classification:<13} {v.estimate:14.8f}  {v.reason}")

v = classify_criterion("s^2", 1.0, form="reciprocal")
print(f"\nint_1^inf ds/s^2 = {v.estimate:.10f} ({v.classification})")
