# %% [markdown]
# # Entropy versus Euclidean mirror map
#
# Same graph, same instance, same sampling seeds. Only the Bregman
# divergence used in the averaging and prox steps changes. On the simplex
# the entropy map gives multiplicative updates in closed form, and each
# step moves much further than a Euclidean projection step.

# %%
import numpy as np

from sbpdmm import default_params, erdos_renyi, mixing_matrix, random_linear_simplex, solve_exact
from sbpdmm.diagnostics import run_traced

m, n, omega, T, trials = 50, 50, 0.75, 3000, 5

# %%
rel = {"entropy": [], "euclidean": []}
for k in range(trials):
    P = mixing_matrix(erdos_renyi(m, 0.2, seed=k))
    prob = random_linear_simplex(m, n, seed=k)
    cert = solve_exact(prob, P)
    for mirror in rel:
        # the step sizes depend on the mirror map through sigma
        params = default_params(omega, 1.0, mirror, n, T=T, seed=k)
        _, tr = run_traced(prob, P, mirror, params, cert, timing=False)
        rel[mirror].append(np.abs(tr.column("primal_gap")) / abs(cert.f_star))

avg = {k: np.mean(v, axis=0) for k, v in rel.items()}

# %%
for mirror, curve in avg.items():
    hit = np.flatnonzero(curve <= 1e-3)
    print(f"{mirror:9s} gap@100 {curve[99]:.2e}  gap@1000 {curve[999]:.2e}  "
          f"gap@{T} {curve[-1]:.2e}  first t <= 1e-3: {hit[0] + 1 if hit.size else 'never'}")

# %% [markdown]
# The Euclidean variant moves the nodes to the same vertex eventually but
# spends a long time on the face of the simplex where two costs are close.
