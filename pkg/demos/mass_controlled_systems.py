"""
Pairs (-u F(v), u G(v)) where the two reactions cancel in the total mass.

For F = G = e^v the bound ||u0||_inf <= 8ab/(a-b)^2 is a known sufficient
condition for global existence; with a = 2, b = 1 it reads u0 <= 16. We run
inside it, audit the Gronwall inequality y' <= C (y + |Omega|) on the
total mass, then look at the exp(v^gamma) family as gamma approaches 1.
A completed run here is evidence, not proof.
"""
import numpy as np

from rdlab import Grid, Problem, builtin, gronwall_ledger, simulate
from rdlab.diagnostics import check_mass_control, check_positivity_condition, check_ratio_trend

a, b = 2.0, 1.0
print(f"threshold 8ab/(a-b)^2 = {8 * a * b / (a - b) ** 2:g}")

grid = Grid.interval(1.0, 257)
fk = builtin("frank_kamenetskii")
res = simulate(Problem(grid, fk, grid.constant(1.0), 5.0, a=a, b=b, v0=grid.constant(0.1)))
tr = res.trace
mass = tr["mass_u"] + tr["mass_v"]
print(f"terminal {res.terminal} at t = {res.t_end:g}")
print(f"||u||_inf non-increasing: {bool(np.all(np.diff(tr['linf_u']) <= 0))}")
print(f"max ||v||_inf = {tr['linf_v'].max():.6f}")
print(f"relative mass drift = {np.max(np.abs(mass - mass[0])) / mass[0]:.2e}")
ledger = gronwall_ledger(tr, C=1.0)
print(f"Gronwall ledger: {ledger.verdict}, C' = {ledger.C_prime:.4f}")
print(f"positivity {check_positivity_condition(fk).verdict}, "
      f"mass control {check_mass_control(fk).verdict}, "
      f"G'/F trend {check_ratio_trend(fk).verdict}")

print("\nexp(v^gamma) family, u0 = 1 + cos(pi x)/2, v0 = 1, T = 2")
u0 = grid.from_function(lambda x: 1 + 0.5 * np.cos(np.pi * x))
for gamma in (0.25, 0.5, 0.75, 0.95):
    pair = builtin("haraux_youkana", gamma=gamma)
    out = simulate(Problem(grid, pair, u0, 2.0, a=1.0, b=0.5, v0=grid.constant(1.0)))
    trend = check_ratio_trend(pair).verdict
    print(f"gamma={gamma:4.2f}  {out.terminal:>9}  max v = {out.trace['linf_v'].max():8.4f}  trend {trend}")
