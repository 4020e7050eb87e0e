import dataclasses

import numpy as np
import pytest
from scipy import stats

from oracles import naive_mirror_average_entropy
from sbpdmm.diagnostics import read_trace_csv, run_traced
from sbpdmm.graph import cycle_graph, erdos_renyi, read_edge_list
from sbpdmm.mixing import mixing_matrix
from sbpdmm.problems import LinearSimplexProblem, random_linear_simplex, solve_exact
from sbpdmm.solver import (
    ParameterError,
    SolverParams,
    SolverState,
    check_params,
    default_params,
    dual_update,
    initial_state,
    iterate,
    mirror_average,
    run,
    sample_nodes,
    subset_size,
)


def test_default_params_examples():
    p = default_params(0.5, 1.0, "entropy", 100)
    assert p.gamma == pytest.approx(0.25) and p.tau == pytest.approx(1 / 6)
    p = default_params(1.0, 1.0, "entropy", 100)
    assert p.gamma == pytest.approx(0.5) and p.tau == pytest.approx(0.5)
    p = default_params(0.5, 2.0, "euclidean", 10)
    assert p.gamma == pytest.approx(0.25) and p.tau == pytest.approx(1 / 3)


def test_default_params_always_admissible():
    for w in np.linspace(0.05, 1.0, 20):
        for mirror in ("entropy", "euclidean"):
            p = default_params(float(w), 1.3, mirror, 7)
            assert check_params(p, mirror, 7)


def test_default_params_rejects_bad_omega():
    with pytest.raises(ParameterError):
        default_params(0.0, 1.0, "entropy", 3)
    with pytest.raises(ParameterError):
        default_params(1.5, 1.0, "entropy", 3)


def test_check_params_names_violated_bound():
    base = default_params(0.5, 1.0, "entropy", 5)
    chk = check_params(dataclasses.replace(base, tau=base.tau * 1.01), "entropy", 5)
    assert not chk and "tau bound" in chk.message
    chk = check_params(dataclasses.replace(base, gamma=0.5), "entropy", 5)
    assert not chk and "gamma bound" in chk.message


def test_params_validation():
    with pytest.raises(ParameterError):
        SolverParams(rho=1.0, tau=0.1, gamma=0.1, omega=0.5, mode="bogus")
    with pytest.raises(ParameterError):
        SolverParams(rho=-1.0, tau=0.1, gamma=0.1, omega=0.5)


def test_subset_size_rounding():
    assert subset_size(4, 0.5) == 2
    assert subset_size(5, 0.5) == 3
    assert subset_size(3, 1.0) == 3
    with pytest.raises(ParameterError):
        subset_size(3, 0.1)


def test_sample_nodes_uniform():
    rng = np.random.default_rng(0)
    draws = 60_000
    counts = {}
    for _ in range(draws):
        S = tuple(sample_nodes(4, 0.5, rng))
        assert len(S) == 2 and len(set(S)) == 2
        counts[S] = counts.get(S, 0) + 1
    assert len(counts) == 6
    obs = np.array(list(counts.values()))
    assert stats.chisquare(obs).pvalue > 1e-3
    assert np.array_equal(sample_nodes(5, 1.0, rng), np.arange(5))


def test_mirror_average_examples():
    P = np.full((2, 2), 0.5)
    x = np.array([[0.8, 0.2], [0.5, 0.5]])
    assert np.allclose(mirror_average(x, P, "entropy", [0]), [[2 / 3, 1 / 3]])
    assert np.allclose(mirror_average(x, P, "euclidean", [0]), [[0.65, 0.35]])


def test_mirror_average_matches_naive(rng):
    P = mixing_matrix(erdos_renyi(6, 0.5, 1))
    x = rng.dirichlet(np.ones(4), size=6)
    y = mirror_average(x, P, "entropy")
    for i in range(6):
        assert np.allclose(y[i], naive_mirror_average_entropy(x, P, i), atol=1e-14)


def test_dual_update_example():
    P = np.full((2, 2), 0.5)
    x = np.array([[1.0, 0.0], [0.0, 1.0]])
    s = SolverState(x=x, mu=np.zeros((2, 2)), mu_prev=np.zeros((2, 2)))
    out = dual_update(s, P, 0.1)
    assert np.allclose(out.mu, [[0.05, -0.05], [-0.05, 0.05]])
    assert np.array_equal(out.mu_prev, s.mu)


def test_dual_sum_invariant(rng):
    P = mixing_matrix(erdos_renyi(8, 0.4, 3))
    prob = random_linear_simplex(8, 4, 3)
    params = default_params(0.5, 1.0, "entropy", 4, seed=1)
    state = initial_state(prob, P, params)
    r = np.random.default_rng(1)
    for _ in range(50):
        state = iterate(state, prob, P, "entropy", params, r)
        assert np.allclose(state.mu.sum(axis=0), 0, atol=1e-12)


def test_euclidean_fixed_point():
    c = np.array([[0.0, 2.0, 3.0], [1.0, 2.5, 4.0], [-1.0, 1.0, 0.5]])
    prob = LinearSimplexProblem(c)
    P = mixing_matrix(cycle_graph(3))
    cert = solve_exact(prob, P)
    params = default_params(1.0, 1.0, "euclidean", 3, mode="deterministic")
    state = initial_state(prob, P, params, x0=cert.x_star, mu0=cert.mu_star, mirror="euclidean")
    nxt = iterate(state, prob, P, "euclidean", params)
    assert np.array_equal(nxt.x, cert.x_star)
    assert np.array_equal(nxt.mu, cert.mu_star)


def test_single_node_prox_sequence():
    prob = LinearSimplexProblem([[np.log(2), 0.0]])
    P = np.ones((1, 1))
    params = default_params(1.0, 1.0, "entropy", 2, T=3, seed=0)
    state = run(prob, P, "entropy", params)
    # each step multiplies the odds of the second coordinate by 2
    assert np.allclose(state.x, [[1 / 9, 8 / 9]])
    assert not state.mu.any()


def test_feasibility_preserved(rng):
    P = mixing_matrix(erdos_renyi(10, 0.3, 5))
    prob = random_linear_simplex(10, 6, 5)
    for mirror in ("entropy", "euclidean"):
        params = default_params(0.3, 0.7, mirror, 6, T=300, seed=2)
        seen = []
        run(prob, P, mirror, params, sink=lambda s: seen.append(s.x))
        for x in seen:
            assert np.all(x >= 0) and np.allclose(x.sum(axis=1), 1, atol=1e-12)


def test_entropy_stays_finite_long_run():
    P = mixing_matrix(erdos_renyi(6, 0.5, 0))
    prob = random_linear_simplex(6, 4, 0)
    params = default_params(1.0, 1.0, "entropy", 4, T=3000, seed=0)
    state = run(prob, P, "entropy", params)
    assert np.all(np.isfinite(state.log_x))


def test_untouched_blocks_unchanged():
    P = mixing_matrix(erdos_renyi(6, 0.5, 0))
    prob = random_linear_simplex(6, 3, 0)
    params = default_params(0.5, 1.0, "entropy", 3, seed=0)
    state = initial_state(prob, P, params)
    state = iterate(state, prob, P, "entropy", params, np.random.default_rng(0))
    nxt = iterate(state, prob, P, "entropy", params, nodes=[1, 4])
    keep = [0, 2, 3, 5]
    assert np.array_equal(nxt.x[keep], state.x[keep])
    assert nxt.sampled == (1, 4)


def test_deterministic_equals_full_stochastic():
    P = mixing_matrix(erdos_renyi(5, 0.6, 2))
    prob = random_linear_simplex(5, 3, 2)
    a = run(prob, P, "entropy", default_params(1.0, 1.0, "entropy", 3, T=40, seed=9))
    b = run(prob, P, "entropy", default_params(1.0, 1.0, "entropy", 3, T=40, mode="deterministic"))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.mu, b.mu)


def test_seeded_runs_are_reproducible():
    P = mixing_matrix(erdos_renyi(7, 0.4, 4))
    prob = random_linear_simplex(7, 3, 4)
    params = default_params(0.4, 1.0, "entropy", 3, T=100, seed=17)
    a, b = run(prob, P, "entropy", params), run(prob, P, "entropy", params)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.mu, b.mu)


def test_zero_iterations():
    P = mixing_matrix(cycle_graph(3))
    prob = random_linear_simplex(3, 2, 0)
    params = default_params(0.5, 1.0, "entropy", 2, T=0, seed=0)
    state, tracer = run_traced(prob, P, "entropy", params, solve_exact(prob, P))
    assert state.t == 0 and tracer.records == []


def test_stochastic_needs_rng():
    P = mixing_matrix(cycle_graph(3))
    prob = random_linear_simplex(3, 2, 0)
    params = default_params(0.5, 1.0, "entropy", 2)
    with pytest.raises(ValueError):
        iterate(initial_state(prob, P, params), prob, P, "entropy", params)


def test_golden_trace(fixtures):
    g = read_edge_list(fixtures / "er_m5_p05_seed42.txt", node_count=5)
    assert g == erdos_renyi(5, 0.5, 42)
    P = mixing_matrix(g)
    prob = random_linear_simplex(5, 3, 11)
    params = default_params(0.6, 1.0, "entropy", 3, T=10, seed=3)
    _, tracer = run_traced(prob, P, "entropy", params, solve_exact(prob, P), timing=False)
    golden = read_trace_csv(fixtures / "golden_trace_m5_n3.csv")
    assert len(golden) == len(tracer.records) == 10
    for a, b in zip(golden, tracer.records):
        assert a.t == b.t
        for col in ("objective", "primal_gap", "consensus_residual", "duality_gap", "lyapunov", "ergodic_gap"):
            assert getattr(a, col) == pytest.approx(getattr(b, col), abs=1e-12, rel=1e-12)
