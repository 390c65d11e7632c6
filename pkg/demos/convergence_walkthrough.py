"""Convergence of both solvers on one channel draw.

Run with ``python3 demos/convergence_walkthrough.py``. MADMM drives the
consensus residual ||F - F_RF F_BB|| to zero; the trust-region method drives
the Riemannian gradient norm to zero, usually within a handful of steps.
"""

from dfrc_hbf.experiments import ExperimentConfig, build_problem, design

cfg = ExperimentConfig()
problem = build_problem(cfg, seed=0)

_, full = design(cfg, problem, 0.5, "full")
print(f"MADMM: {full.iterations} iterations, status {full.status}")
for k in range(0, full.iterations, max(1, full.iterations // 8)):
    print(f"  it {k + 1:3d}  J = {full.objective_trace[k]:.6f}  residual = {full.primal_residual_trace[k]:.2e}")

_, part = design(cfg, problem, 0.5, "partial")
print(f"\nRPM-TR: {part.iterations} iterations, status {part.status}")
print(f"  start  J = {part.initial_objective:.6f}  |grad| = {part.initial_grad_norm:.2e}")
for k in range(part.iterations):
    print(f"  it {k + 1:3d}  J = {part.objective_trace[k]:.6f}  |grad| = {part.grad_norm_trace[k]:.2e}")

# the fully-connected feasible set contains the partial one, so J should be lower
print(f"\nfinal J: full {full.objective_trace[-1]:.6f}, partial {part.objective_trace[-1]:.6f}")
