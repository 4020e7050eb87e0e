"""Command-line experiment runner.

Usage::

    sbpdmm run CONFIG        # traces (CSV) and summary (JSON)
    sbpdmm verify [CONFIG]   # numerical checks of the convergence guarantees
    sbpdmm spectrum CONFIG   # second eigenvalue and PSD margin of P

The config is a flat ``key = value`` file; ``#`` starts a comment. Lists
(``mirror``, ``params.omega``) are comma separated and swept. Keys:

    graph.kind        erdos_renyi | cycle | path | complete  (erdos_renyi)
    graph.m           number of nodes
    graph.p_edge      edge probability                       (0.2)
    graph.seed        base seed; trial k uses seed + k       (0)
    graph.edge_list   file with one "i j" pair per line (overrides the above)
    problem.kind      gaussian | shared_argmin               (gaussian)
    problem.n         dimension
    problem.seed      base seed                              (0)
    problem.instance  JSON instance file (overrides the above)
    mirror            entropy | euclidean                    (entropy)
    params.omega      fraction of nodes updated              (0.5)
    params.rho        (1.0)
    params.tau        default: saturate the step-size bound
    params.gamma      default: omega*alpha*sigma/2
    params.tau_scale  multiplies tau                         (1.0)
    params.T          iterations                             (1000)
    params.mode       stochastic | deterministic             (stochastic)
    params.seed       sampling seed base                     (0)
    trials            number of seeds                        (1)
    output.dir        output directory                       (.)
    output.timing     fill elapsed_ms                        (false)

``verify`` additionally reads ``verify.iterations`` (50), ``verify.seeds``
(200) and ``verify.T`` (iterations for the ergodic bounds, 200); without a
config it checks a 4-node cycle with n=3 and omega=0.5.

Set ``SBPDMM_LOG_LEVEL`` (e.g. DEBUG) for log output.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import os
import sys
from pathlib import Path

from sbpdmm import diagnostics as diag
from sbpdmm.graph import (
    GraphGenerationError,
    complete_graph,
    cycle_graph,
    erdos_renyi,
    path_graph,
    read_edge_list,
)
from sbpdmm.mirror import get_mirror
from sbpdmm.mixing import min_eigenvalue, mixing_matrix, second_eigenvalue, validate
from sbpdmm.problems import (
    LinearSimplexProblem,
    approximate_certificate,
    random_linear_simplex,
    shared_argmin_linear_simplex,
    solve_exact,
)
from sbpdmm.solver import SolverParams, check_params, default_params, subset_size
from sbpdmm import verify as vf

log = logging.getLogger("sbpdmm")

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_BAD_PARAMS = 2
EXIT_GENERATION = 3

VERIFY_DEFAULTS = {
    "graph.kind": "cycle",
    "graph.m": "4",
    "problem.kind": "shared_argmin",
    "problem.n": "3",
    "params.omega": "0.5",
    "params.T": "50",
}


class ConfigError(ValueError):
    pass


class Config(dict):
    """Flat string mapping with typed getters."""

    def get_str(self, key, default=None):
        v = self.get(key)
        return default if v is None or v == "" else v

    def get_int(self, key, default=None):
        v = self.get_str(key)
        return default if v is None else int(v)

    def get_float(self, key, default=None):
        v = self.get_str(key)
        return default if v is None else float(v)

    def get_bool(self, key, default=False):
        v = self.get_str(key)
        if v is None:
            return default
        return v.strip().lower() in ("1", "true", "yes", "on")

    def get_list(self, key, default):
        v = self.get_str(key)
        if v is None:
            return list(default)
        return [s.strip() for s in v.split(",") if s.strip()]


def load_config(path=None, defaults=None) -> Config:
    cfg = Config(defaults or {})
    if path is None:
        return cfg
    text = Path(path).read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    cfg.update(cp["config"])
    cfg["_base"] = str(Path(path).resolve().parent)
    return cfg


def _resolve(cfg, p):
    p = Path(p)
    return p if p.is_absolute() else Path(cfg.get("_base", ".")) / p


def build_graph(cfg: Config, trial: int = 0):
    if cfg.get_str("graph.edge_list"):
        return read_edge_list(_resolve(cfg, cfg["graph.edge_list"]), cfg.get_int("graph.m"))
    kind = cfg.get_str("graph.kind", "erdos_renyi")
    m = cfg.get_int("graph.m")
    if m is None:
        raise ConfigError("graph.m is required")
    if kind == "erdos_renyi":
        return erdos_renyi(m, cfg.get_float("graph.p_edge", 0.2), cfg.get_int("graph.seed", 0) + trial)
    builders = {"cycle": cycle_graph, "path": path_graph, "complete": complete_graph}
    if kind not in builders:
        raise ConfigError(f"unknown graph.kind {kind!r}")
    return builders[kind](m)


def build_problem(cfg: Config, m: int, trial: int = 0) -> LinearSimplexProblem:
    if cfg.get_str("problem.instance"):
        prob = LinearSimplexProblem.load(_resolve(cfg, cfg["problem.instance"]))
        if prob.m != m:
            raise ConfigError(f"instance has {prob.m} nodes, graph has {m}")
        return prob
    n = cfg.get_int("problem.n")
    if n is None:
        raise ConfigError("problem.n is required")
    seed = cfg.get_int("problem.seed", 0) + trial
    kind = cfg.get_str("problem.kind", "gaussian")
    if kind == "gaussian":
        return random_linear_simplex(m, n, seed)
    if kind == "shared_argmin":
        return shared_argmin_linear_simplex(m, n, seed)
    raise ConfigError(f"unknown problem.kind {kind!r}")


def build_params(cfg: Config, omega: float, mirror, n: int, trial: int = 0) -> SolverParams:
    rho = cfg.get_float("params.rho", 1.0)
    mode = cfg.get_str("params.mode", "stochastic")
    base = default_params(omega, rho, mirror, n, T=cfg.get_int("params.T", 1000),
                          seed=cfg.get_int("params.seed", 0) + trial, mode=mode)
    tau = cfg.get_float("params.tau", base.tau) * cfg.get_float("params.tau_scale", 1.0)
    gamma = cfg.get_float("params.gamma", base.gamma)
    return dataclasses.replace(base, tau=tau, gamma=gamma)


def certificate_for(problem, P):
    cert = solve_exact(problem, P)
    if not cert.exact:
        log.info("closed-form dual residual %.2e; falling back to a BPDMM certificate", cert.kkt_residual)
        cert = approximate_certificate(problem, P)
    return cert


def _tag(mirror, omega):
    return f"{mirror}_omega{omega:g}"


def cmd_run(cfg: Config, out=None) -> int:
    out = out or sys.stdout
    mirrors = [get_mirror(s).kind for s in cfg.get_list("mirror", ["entropy"])]
    omegas = [float(s) for s in cfg.get_list("params.omega", ["0.5"])]
    trials = cfg.get_int("trials", 1)
    outdir = Path(cfg.get_str("output.dir", "."))
    if not outdir.is_absolute() and "_base" in cfg:
        outdir = Path(cfg["_base"]) / outdir
    outdir.mkdir(parents=True, exist_ok=True)
    timing = cfg.get_bool("output.timing", False)

    # validate every parameter combination before running anything
    n_probe = cfg.get_int("problem.n")
    if n_probe is None and cfg.get_str("problem.instance"):
        n_probe = LinearSimplexProblem.load(_resolve(cfg, cfg["problem.instance"])).n
    for mirror in mirrors:
        for omega in omegas:
            params = build_params(cfg, omega, mirror, n_probe)
            if params.mode == "stochastic":
                chk = check_params(params, mirror, n_probe)
                if not chk:
                    print(f"refusing to run {_tag(mirror, omega)}: {chk.message}", file=sys.stderr)
                    return EXIT_BAD_PARAMS

    summary = {"runs": {}}
    setups = []
    for k in range(trials):
        g = build_graph(cfg, k)
        P = mixing_matrix(g)
        prob = build_problem(cfg, g.node_count, k)
        setups.append((g, P, prob, certificate_for(prob, P)))

    for mirror in mirrors:
        for omega in omegas:
            tag = _tag(mirror, omega)
            traces, trial_info = [], []
            for k, (g, P, prob, cert) in enumerate(setups):
                params = build_params(cfg, omega, mirror, prob.n, k)
                _, tracer = diag.run_traced(prob, P, mirror, params, cert, timing=timing)
                diag.write_trace_csv(tracer.records, outdir / f"{tag}_trial{k}.csv")
                traces.append(tracer.records)
                T = params.T
                bounds = diag.corollary_bounds(tracer.V0, params, T, prob.m) if T > 0 else None
                last = tracer.records[-1] if tracer.records else None
                trial_info.append({
                    "trial": k,
                    "lambda2": second_eigenvalue(P),
                    "f_star": cert.f_star,
                    "certificate": cert.exactness,
                    "kkt_residual": cert.kkt_residual,
                    "V0": tracer.V0,
                    "corollary_bounds": bounds,
                    "final_primal_gap": None if last is None else last.primal_gap,
                    "final_duality_gap": None if last is None else last.duality_gap,
                    "final_ergodic_gap": None if last is None else last.ergodic_gap,
                    "final_consensus_residual": None if last is None else last.consensus_residual,
                })
            diag.write_trace_csv(diag.mean_trace(traces), outdir / f"{tag}_mean.csv")
            p0 = build_params(cfg, omega, mirror, setups[0][2].n)
            summary["runs"][tag] = {
                "mirror": mirror,
                "params": {
                    "omega": p0.omega, "rho": p0.rho, "tau": p0.tau, "gamma": p0.gamma,
                    "T": p0.T, "mode": p0.mode,
                    "subset_size": None if p0.mode == "deterministic" else subset_size(setups[0][2].m, p0.omega),
                },
                "trials": trial_info,
            }
            print(f"{tag}: {trials} trial(s) written to {outdir}", file=out)
    diag.write_summary_json(summary, outdir / "summary.json")
    return EXIT_OK


def cmd_verify(cfg: Config, out=None) -> int:
    out = out or sys.stdout
    mirror = get_mirror(cfg.get_list("mirror", ["entropy"])[0])
    omega = float(cfg.get_list("params.omega", ["0.5"])[0])
    g = build_graph(cfg, 0)
    P = mixing_matrix(g)
    prob = build_problem(cfg, g.node_count, 0)
    cert = certificate_for(prob, P)
    params = build_params(cfg, omega, mirror, prob.n)
    iterations = cfg.get_int("verify.iterations", params.T)

    outcomes = [vf.check_parameter_identity(params, mirror, prob.n)]
    thm, lem, _ = vf.check_theorem_exact(prob, P, mirror, params, cert, iterations)
    outcomes += [thm, lem]
    seeds = range(cfg.get_int("verify.seeds", 200))
    outcomes += vf.check_corollary(prob, P, mirror, params, cert, cfg.get_int("verify.T", 200), seeds)
    for o in outcomes:
        print(o.line(), file=out)
    failed = [o.name for o in outcomes if not o.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=out)
        return EXIT_FAILED_CHECK
    return EXIT_OK


def cmd_spectrum(cfg: Config, out=None) -> int:
    out = out or sys.stdout
    g = build_graph(cfg, 0)
    P = mixing_matrix(g)
    print(f"nodes {g.node_count}, edges {len(g.edges)}", file=out)
    print(f"lambda2 {second_eigenvalue(P):.10f}", file=out)
    print(f"psd_margin {min_eigenvalue(P):.10f}", file=out)
    print(validate(P, g), file=out)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SBPDMM_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    ap = argparse.ArgumentParser(prog="sbpdmm", description="Stochastic Bregman PDMM experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", help="run experiments and write traces").add_argument("config")
    sub.add_parser("verify", help="check the convergence guarantees numerically").add_argument("config", nargs="?")
    sub.add_parser("spectrum", help="report the spectrum of the mixing matrix").add_argument("config")
    args = ap.parse_args(argv)

    try:
        if args.command == "verify":
            return cmd_verify(load_config(args.config, VERIFY_DEFAULTS))
        cfg = load_config(args.config)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_spectrum(cfg)
    except GraphGenerationError as exc:
        print(f"graph generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


if __name__ == "__main__":
    sys.exit(main())
