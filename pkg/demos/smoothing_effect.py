"""
The heat semigroup maps L^p into L^q with norm ~ t^(-(n/2)(1/p - 1/q)).

We measure that exponent on the discrete Neumann problem using the exact
spectral propagator. A single-node spike is the standard near-delta datum;
propagating it only probes the L^1 scaling, which is why the default
"adapted" mode fits ||S(2t)v||_q / ||S(t)v||_p instead.
"""
import math

from rdlab import Grid, fit_smoothing, spike

grid = Grid.interval(1.0, 2049)

print(f"{'p':>4} {'q':>5} {'theory':>8} {'adapted':>9} {'fixed':>9} {'R^2':>8}")
for p, q in [(1, math.inf), (2, math.inf), (1, 2), (2, 4), (4, math.inf)]:
    v = spike(grid, p)
    fit = fit_smoothing(p, q, v)
    fixed = fit_smoothing(p, q, v, mode="fixed")
    print(f"{p:4g} {q:5g} {fit.theory_slope:8.4f} {fit.slope:9.4f} {fixed.slope:9.4f} {fit.r2:8.5f}")

square = Grid.rectangle((1.0, 1.0), 257)
fit = fit_smoothing(1, math.inf, spike(square, 1), t_samples=[1e-4 * 10 ** (k / 10) for k in range(-5, 5)])
print(f"\n2D, p=1, q=inf: theory {fit.theory_slope:.3f}, fitted {fit.slope:.4f}")
