"""Command-line front end: instance generation, solving, oracle checks and
the two benchmark experiments.

Every run writes canonical CSV/JSON plus a metadata record holding all
seeds, flags and tolerances, so identical invocations produce byte-identical
files.  Exit codes: 0 success, 2 usage or input error, 3 iteration cap hit
without convergence, 4 internal solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .admm import AdmmConfig, SolverError, solve
from .fileio import dump_json, load_instance, save_instance, save_marginals
from .game import (
    EngineerStrategy,
    assignment_payoff,
    exact_minimax_joint,
    expected_payoff,
    local_polytope_lp,
    mix_with_uniform,
    nature_best_response,
    sample_tree_mrf,
)
from .ising import IsingSpec, build_ising, generation_record, nominal_instance
from .maxproduct import max_product_map

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_SOLVER_FAILURE = 4

# instances larger than this skip the LP-oracle columns (recorded, not silent)
ORACLE_ROW_CAP = 700
JOINT_ORACLE_VAR_CAP = 2**14

_PLOT_EXPERIMENT1 = """\
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("experiment1.csv")))
deltas = [float(r["delta"]) for r in rows]
plt.plot(deltas, [float(r["j_robust"]) for r in rows], "o-", label="robust")
plt.plot(deltas, [float(r["j_nominal_worstcase"]) for r in rows], "s-", label="nominal")
oracle = [(d, float(r["j_oracle"])) for d, r in zip(deltas, rows) if r["j_oracle"]]
if oracle:
    plt.plot(*zip(*oracle), "x", label="LP oracle")
plt.xlabel("delta")
plt.ylabel("worst-case expected payoff")
plt.legend()
plt.savefig("experiment1.png", dpi=150)
"""

_PLOT_EXPERIMENT2 = """\
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("experiment2.csv")))
alphas = [float(r["alpha"]) for r in rows]
plt.plot(alphas, [float(r["payoff_robust"]) for r in rows], "-", label="robust")
plt.plot(alphas, [float(r["payoff_nominal"]) for r in rows], "-", label="nominal")
for r, a in zip(rows, alphas):
    samples = [float(v) for k, v in r.items() if k.startswith("sample_robust_")]
    plt.plot([a] * len(samples), samples, ".", color="gray", markersize=3)
plt.xlabel("alpha")
plt.ylabel("expected payoff")
plt.legend()
plt.savefig("experiment2.png", dpi=150)
"""

_PLOT_CONVERGENCE = """\
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("convergence.csv")))
its = [int(r["iteration"]) for r in rows]
fig, (top, bottom) = plt.subplots(2, 1, sharex=True)
top.plot(its, [float(r["J"]) for r in rows])
top.set_ylabel("objective")
bottom.semilogy(its, [float(r["mean_l1_residual"]) for r in rows])
bottom.set_ylabel("mean l1 residual")
bottom.set_xlabel("iteration")
plt.savefig("convergence.png", dpi=150)
"""


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, str) else _fmt(v) for v in row) + "\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config file: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, key: str, config: dict, default):
    """Flag beats config file beats default (flags parse to None when absent)."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _admm_config(args, config) -> AdmmConfig:
    return AdmmConfig(
        rho=float(_merged(args, "rho", config, 1.0)),
        max_iter=int(_merged(args, "max_iter", config, 100)),
        primal_tol=float(_merged(args, "primal_tol", config, 1e-6)),
        objective_tol=float(_merged(args, "objective_tol", config, 1e-9)),
    )


def _grid(text: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v.strip() != ""]
    if not values or values != sorted(values):
        raise ValueError("grid must be a nonempty ascending comma-separated list")
    return values


def _ising_spec(args, config) -> IsingSpec:
    return IsingSpec(
        n=int(_merged(args, "n", config, 0)),
        delta=float(_merged(args, "delta", config, 0.0)),
        h=float(_merged(args, "h", config, 0.0)),
        seed=int(_merged(args, "seed", config, 0)),
        edge_sign_prob=float(_merged(args, "edge_sign_prob", config, 0.5)),
    )


def _run_metadata(command: str, payload: dict) -> dict:
    return {"command": command, "version": __version__, **payload}


def cmd_gen(args) -> int:
    config = _load_config(args.config)
    spec = _ising_spec(args, config)
    out = Path(_merged(args, "out", config, "."))
    out.mkdir(parents=True, exist_ok=True)
    instance = build_ising(spec)
    save_instance(instance, out / "instance.json")
    dump_json(
        _run_metadata("gen", generation_record(spec)),
        out / "instance_meta.json",
    )
    print(f"wrote {out / 'instance.json'}")
    return EXIT_OK


def _solve_with_trace(instance, cfg):
    report = solve(instance, cfg)
    rows = [
        [t + 1, report.internal_cost_trace[t], report.objective_trace[t], report.residual_trace[t]]
        for t in range(report.iterations_used)
    ]
    return report, rows


def cmd_solve(args) -> int:
    config = _load_config(args.config)
    instance = load_instance(args.instance)
    cfg = _admm_config(args, config)
    out = Path(_merged(args, "out", config, "."))
    out.mkdir(parents=True, exist_ok=True)
    report, rows = _solve_with_trace(instance, cfg)
    _write_csv(out / "trace.csv", ["iteration", "C", "J", "mean_l1_residual"], rows)
    save_marginals(
        report.marginals.factor_marginals,
        report.marginals.node_marginals,
        out / "marginals.json",
    )
    dump_json(
        _run_metadata(
            "solve",
            {
                "instance": str(args.instance),
                "rho": cfg.rho,
                "max_iter": cfg.max_iter,
                "primal_tol": cfg.primal_tol,
                "objective_tol": cfg.objective_tol,
                "engineer_objective": report.engineer_objective,
                "iterations_used": report.iterations_used,
                "converged": report.converged,
            },
        ),
        out / "solve_meta.json",
    )
    print(
        f"J={report.engineer_objective!r} iterations={report.iterations_used} "
        f"converged={report.converged}"
    )
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def cmd_convergence(args) -> int:
    config = _load_config(args.config)
    instance = load_instance(args.instance)
    cfg = _admm_config(args, config)
    out = Path(_merged(args, "out", config, "."))
    out.mkdir(parents=True, exist_ok=True)
    report, rows = _solve_with_trace(instance, cfg)
    _write_csv(out / "convergence.csv", ["iteration", "C", "J", "mean_l1_residual"], rows)
    (out / "plot_convergence.py").write_text(_PLOT_CONVERGENCE, encoding="utf-8")
    dump_json(
        _run_metadata(
            "convergence",
            {
                "instance": str(args.instance),
                "rho": cfg.rho,
                "max_iter": cfg.max_iter,
                "primal_tol": cfg.primal_tol,
                "objective_tol": cfg.objective_tol,
                "converged": report.converged,
            },
        ),
        out / "convergence_meta.json",
    )
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _nominal_worstcase(instance):
    """Worst-case payoff of the strategy that plays MAP of the center values."""
    x_nominal, _ = max_product_map(nominal_instance(instance))
    pure = EngineerStrategy.from_assignment(instance, x_nominal)
    return expected_payoff(instance, pure, nature_best_response(instance, pure)), pure


def _oracle_within_limits(instance) -> bool:
    q = instance.alphabet.size
    rows = sum(f.degree for f in instance.factors) * q + instance.n_variables
    return rows <= ORACLE_ROW_CAP


def cmd_experiment1(args) -> int:
    config = _load_config(args.config)
    base = _ising_spec(args, config)
    grid = _grid(_merged(args, "delta_grid", config, "0,0.25,0.5,0.75,1,1.25,1.5,1.75,2"))
    cfg = _admm_config(args, config)
    out = Path(_merged(args, "out", config, "."))
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    failed = False
    for delta in grid:
        spec = IsingSpec(base.n, delta, base.h, base.seed, base.edge_sign_prob)
        try:
            instance = build_ising(spec)
            report = solve(instance, cfg)
            robust = EngineerStrategy(report.marginals)
            j_robust = expected_payoff(
                instance, robust, nature_best_response(instance, robust)
            )
            j_nominal, _ = _nominal_worstcase(instance)
            if _oracle_within_limits(instance):
                j_oracle = _fmt(local_polytope_lp(instance)[0])
            else:
                j_oracle = ""
            rows.append([delta, j_robust, j_nominal, j_oracle, ""])
        except (ValueError, RuntimeError) as exc:
            failed = True
            rows.append([delta, "", "", "", f"error: {exc}"])
    _write_csv(
        out / "experiment1.csv",
        ["delta", "j_robust", "j_nominal_worstcase", "j_oracle", "error"],
        rows,
    )
    (out / "plot_experiment1.py").write_text(_PLOT_EXPERIMENT1, encoding="utf-8")
    dump_json(
        _run_metadata(
            "experiment1",
            {
                "n": base.n,
                "h": base.h,
                "seed": base.seed,
                "edge_sign_prob": base.edge_sign_prob,
                "delta_grid": grid,
                "rho": cfg.rho,
                "max_iter": cfg.max_iter,
                "primal_tol": cfg.primal_tol,
                "objective_tol": cfg.objective_tol,
            },
        ),
        out / "experiment1_meta.json",
    )
    return EXIT_SOLVER_FAILURE if failed else EXIT_OK


def cmd_experiment2(args) -> int:
    config = _load_config(args.config)
    spec = _ising_spec(args, config)
    grid = _grid(_merged(args, "alpha_grid", config, "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"))
    samples = int(_merged(args, "samples", config, 50))
    if samples < 1:
        raise ValueError("samples must be at least 1")
    cfg = _admm_config(args, config)
    out = Path(_merged(args, "out", config, "."))
    out.mkdir(parents=True, exist_ok=True)

    instance = build_ising(spec)
    report = solve(instance, cfg)
    robust = EngineerStrategy(report.marginals)
    q_star = nature_best_response(instance, robust)
    j_nominal, nominal_pure = _nominal_worstcase(instance)
    q_tilde = nature_best_response(instance, nominal_pure)

    header = ["alpha", "payoff_robust", "payoff_nominal"]
    header += [f"sample_robust_{s}" for s in range(samples)]
    header += [f"sample_nominal_{s}" for s in range(samples)]
    rows = []
    failed = False
    for grid_index, alpha in enumerate(grid):
        try:
            q_mix = mix_with_uniform(q_star, alpha)
            q_tilde_mix = mix_with_uniform(q_tilde, alpha)
            row = [
                alpha,
                expected_payoff(instance, robust, q_mix),
                expected_payoff(instance, nominal_pure, q_tilde_mix),
            ]
            for s in range(samples):
                x = sample_tree_mrf(instance, robust, seed=spec.seed + 1009 * grid_index + s)
                row.append(assignment_payoff(instance, x, q_mix))
            for s in range(samples):
                row.append(assignment_payoff(instance, nominal_pure.assignment, q_tilde_mix))
            rows.append(row)
        except (ValueError, RuntimeError) as exc:
            failed = True
            rows.append([alpha] + [""] * (len(header) - 2) + [f"error: {exc}"])
    _write_csv(out / "experiment2.csv", header, rows)
    (out / "plot_experiment2.py").write_text(_PLOT_EXPERIMENT2, encoding="utf-8")
    dump_json(
        _run_metadata(
            "experiment2",
            {
                "n": spec.n,
                "delta": spec.delta,
                "h": spec.h,
                "seed": spec.seed,
                "edge_sign_prob": spec.edge_sign_prob,
                "alpha_grid": grid,
                "samples": samples,
                "rho": cfg.rho,
                "max_iter": cfg.max_iter,
                "primal_tol": cfg.primal_tol,
                "objective_tol": cfg.objective_tol,
            },
        ),
        out / "experiment2_meta.json",
    )
    return EXIT_SOLVER_FAILURE if failed else EXIT_OK


def cmd_oracle(args) -> int:
    config = _load_config(args.config)
    instance = load_instance(args.instance)
    out = Path(_merged(args, "out", config, "."))
    out.mkdir(parents=True, exist_ok=True)
    payload: dict = {"instance": str(args.instance)}
    ran_any = False
    if _oracle_within_limits(instance):
        value, marginals = local_polytope_lp(instance)
        payload["local_polytope_value"] = value
        save_marginals(
            marginals.factor_marginals, marginals.node_marginals, out / "oracle_marginals.json"
        )
        ran_any = True
    total = instance.alphabet.size**instance.n_variables
    if total <= JOINT_ORACLE_VAR_CAP:
        value, _ = exact_minimax_joint(instance)
        payload["joint_value"] = value
        ran_any = True
    if not ran_any:
        print("instance too large for either oracle", file=sys.stderr)
        return EXIT_USAGE
    dump_json(_run_metadata("oracle", payload), out / "oracle.json")
    print(json.dumps({k: v for k, v in payload.items() if k != "instance"}, sort_keys=True))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factorgame",
        description="Robust mixed strategies for zero-sum games on factor graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, instance_arg=False):
        if instance_arg:
            p.add_argument("instance", help="instance JSON file")
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--out", help="output directory (default: current)")

    def add_spec(p):
        p.add_argument("--n", type=int, help="number of variables")
        p.add_argument("--delta", type=float, help="uncertainty half-width")
        p.add_argument("--h", type=float, help="field half-width")
        p.add_argument("--seed", type=int, help="generator seed")
        p.add_argument("--edge-sign-prob", dest="edge_sign_prob", type=float)

    def add_admm(p):
        p.add_argument("--rho", type=float, help="penalty parameter")
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--primal-tol", dest="primal_tol", type=float)
        p.add_argument("--objective-tol", dest="objective_tol", type=float)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    add_common(p)
    add_spec(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance file")
    add_common(p, instance_arg=True)
    add_admm(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", help="solve and emit the iteration trace")
    add_common(p, instance_arg=True)
    add_admm(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("experiment1", help="robust vs nominal across a delta grid")
    add_common(p)
    add_spec(p)
    add_admm(p)
    p.add_argument("--delta-grid", dest="delta_grid", help="comma-separated deltas")
    p.set_defaults(func=cmd_experiment1)

    p = sub.add_parser("experiment2", help="payoff under mixtures toward uniform play")
    add_common(p)
    add_spec(p)
    add_admm(p)
    p.add_argument("--alpha-grid", dest="alpha_grid", help="comma-separated alphas")
    p.add_argument("--samples", type=int, help="sampled strategy instantiations per point")
    p.set_defaults(func=cmd_experiment2)

    p = sub.add_parser("oracle", help="run the exact LP oracles on a small instance")
    add_common(p, instance_arg=True)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
