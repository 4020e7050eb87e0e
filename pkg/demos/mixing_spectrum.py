# %% [markdown]
# # Mixing matrices from Metropolis weights
#
# The lazy Metropolis matrix `(I + W)/2` is symmetric, doubly stochastic,
# supported on the graph and positive semidefinite for any connected
# graph. Its second eigenvalue controls how fast averaging spreads.

# %%
import numpy as np

from sbpdmm import erdos_renyi, mixing_matrix, second_eigenvalue, validate
from sbpdmm.graph import complete_graph, cycle_graph, path_graph
from sbpdmm.mixing import min_eigenvalue

for name, g in [("path(10)", path_graph(10)), ("cycle(10)", cycle_graph(10)), ("complete(10)", complete_graph(10))]:
    P = mixing_matrix(g)
    print(f"{name:13s} lambda2 {second_eigenvalue(P):.4f}  min eig {min_eigenvalue(P):.4f}")

# %% denser random graphs mix faster
rows = []
for p_edge in (0.1, 0.2, 0.4, 0.8):
    lam = [second_eigenvalue(mixing_matrix(erdos_renyi(50, p_edge, seed=s))) for s in range(10)]
    rows.append((p_edge, np.mean(lam), np.std(lam)))
for p_edge, mean, sd in rows:
    print(f"p_edge={p_edge:<4} lambda2 {mean:.4f} +- {sd:.4f}")

# %% the full check report for one graph
g = erdos_renyi(20, 0.3, seed=4)
print(validate(mixing_matrix(g), g))
