# %% [markdown]
# # Checking the convergence guarantees numerically
#
# On a 4-node cycle with half the nodes updated per step there are only
# six possible subsets, so the expectation over the random subset can be
# computed exactly. We build an instance where every node prefers the same
# vertex, which makes a zero dual an exact certificate.

# %%
import numpy as np

from sbpdmm import default_params, mixing_matrix, shared_argmin_linear_simplex, solve_exact
from sbpdmm.graph import cycle_graph
from sbpdmm.diagnostics import corollary_bounds, lyapunov, run_traced
from sbpdmm.solver import initial_state
from sbpdmm.verify import check_corollary, check_theorem_exact

P = mixing_matrix(cycle_graph(4))
prob = shared_argmin_linear_simplex(4, 3, seed=0)
cert = solve_exact(prob, P)
params = default_params(0.5, 1.0, "entropy", 3, T=50, seed=0)
print("certificate:", cert.exactness, "mu* == 0:", not cert.mu_star.any())

# %% the one-step inequality at each of the first 50 states
thm, lem, reports = check_theorem_exact(prob, P, "entropy", params, cert, 50)
print(thm.line())
print(lem.line())
margins = np.array([r.margin for r in reports])
print("first margins:", np.array2string(margins[:5], precision=3))

# %% the Lyapunov function along a single run decreases only on average
_, tr = run_traced(prob, P, "entropy", params, cert, timing=False)
V = tr.column("lyapunov")
print("V(0) =", round(tr.V0, 4), " V(10) =", round(V[9], 4), " V(50) =", round(V[-1], 4))

# %% ergodic bounds, averaged over seeds
for o in check_corollary(prob, P, "entropy", params, cert, T=200, seeds=range(100)):
    print(o.line())
V0 = lyapunov(initial_state(prob, P, params), cert, params, P, "entropy", prob)
print(corollary_bounds(V0, params, 200, prob.m))
