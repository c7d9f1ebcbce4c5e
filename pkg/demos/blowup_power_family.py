"""
Power reactions f = u^p started from u0 = 1.

Constant data stay constant under Neumann diffusion, so the PDE run should
follow the ODE u' = u^p exactly: global for p <= 1, blow-up at 1/(p-1)
for p > 1. We sweep p through the registry scenario, then put the PDE
blow-up estimate next to the ODE one for p = 2.
"""
from rdlab import Grid, Problem, ReactionSpec, StepperConfig, compare_pde_ode
from rdlab.scenarios import parse_config, run_sweep

sweep = parse_config({
    "name": "power_family",
    "base": "power",
    "axes": [{"param": "/problem/reaction/params/p", "values": [0.5, 1.0, 1.5, 2.0, 3.0]}],
})
rows = run_sweep(sweep, threads=4, write=False)

print(f"{'p':>5} {'terminal':>10} {'t_est':>12} {'1/(p-1)':>10}")
for r in rows:
    p = r["/problem/reaction/params/p"]
    exact = f"{1 / (p - 1):10.6f}" if p > 1 else f"{'-':>10}"
    t_est = f"{r['t_est']:12.6f}" if r["t_est"] is not None else f"{'-':>12}"
    print(f"{p:5.2f} {r['terminal']:>10} {t_est} {exact}")

# Same comparison by hand, with the ODE integrated alongside.
grid = Grid.interval(1.0, 129)
problem = Problem(grid, ReactionSpec.scalar("u^2"), grid.constant(1.0), 2.0)
cmp = compare_pde_ode(problem, StepperConfig(error_tol=1e-6))
print()
print(f"u^2: PDE t_est = {cmp.pde_t_est:.8f}, ODE t_est = {cmp.ode_t_est:.8f}")
print(f"relative gap {cmp.blowup_gap:.2e}, max |PDE - ODE| before t = {cmp.t_compare:.2f}: "
      f"{cmp.max_deviation:.2e}")
