"""Command-line surface: run experiments from JSON configs, execute the
validation oracles, dump repair traces, and emit machine-readable reports.

All file output is written atomically (temp file plus rename) so an emitted
file is either complete and schema-valid or absent.  Exit codes are stable:
0 success, 1 usage or configuration error, 2 solver-declared failure.
CSV output uses '.' decimals, LF line endings, and shortest round-trip float
formatting, so identical configurations produce byte-identical files on any
platform and with any worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .engine import RunConfig, RunReport, run
from .errors import ConfigError, ContractError, DegenerateProblemError, HlriError, \
    SurfaceNotFoundError
from .evolution_ops import EvolutionConfig
from .fitness import PenaltyParams, default_penalty_params
from .genetic_repair import RepairConfig, repair
from .genotype import MixedGenotype, encode
from .oracle import brute_force_mpp, closed_form_result, hlrf
from .problem_model import (REGISTRY, BenchmarkProblem, Marginal, evaluate_G,
                            make_problem, polynomial_problem)
from .region_zooming import ZoomConfig, initial_region

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


# ---------------------------------------------------------------------------
# Strict config parsing (unknown keys are hard errors)
# ---------------------------------------------------------------------------

def _require_keys(d: dict, allowed: set[str], context: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")


def _load_json(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return data


def problem_from_spec(spec: dict, base_dir: Path) -> BenchmarkProblem:
    """Build a benchmark from its JSON description.

    Either a registry benchmark with parameters, e.g.
    {"benchmark": "linear", "n": 2, "beta_star": 3.0}, or a polynomial limit
    state given inline or via a coefficient file:
    {"benchmark": "polynomial", "path": "g.json"}.
    """
    if not isinstance(spec, dict):
        raise ConfigError("problem must be a JSON object")
    spec = dict(spec)
    spec.pop("label", None)
    name = spec.pop("benchmark", None)
    if name is None:
        raise ConfigError("problem: missing 'benchmark' key")

    if name == "polynomial":
        if "path" in spec:
            _require_keys(spec, {"path"}, "problem")
            from .problem_model import load_polynomial_problem
            return load_polynomial_problem(base_dir / spec["path"])
        _require_keys(spec, {"dimension", "terms", "marginals", "name"}, "problem")
        marginals = None
        if "marginals" in spec:
            from .problem_model import _marginal_from_dict
            marginals = [_marginal_from_dict(m, i)
                         for i, m in enumerate(spec["marginals"])]
        try:
            return polynomial_problem(int(spec["dimension"]), spec["terms"],
                                      name=str(spec.get("name", "polynomial")),
                                      marginals=marginals)
        except KeyError as exc:
            raise ConfigError(f"problem: missing key {exc}") from exc

    allowed = {
        "linear": {"n", "beta_star", "alpha"},
        "sphere": {"center", "radius"},
        "parabolic": {"c", "kappa"},
        "gapped": set(),
    }
    if name not in REGISTRY:
        raise ConfigError(f"unknown benchmark {name!r}; available: "
                          f"{sorted(REGISTRY) + ['polynomial']}")
    _require_keys(spec, allowed[name], f"problem ({name})")
    return make_problem(name, **spec)


_EVOLUTION_KEYS = {"n_p", "n_e", "n_b", "r_uc", "epsilon_sc", "n_bot"}
_REPAIR_KEYS = {"alpha", "k_max", "eta", "beta_ref", "beta_cap", "stability_retries"}
_PENALTY_KEYS = {"c", "lam", "k", "q", "eta"}
_ZOOM_KEYS = {"delta_a", "t_z", "delta_t", "diversity_floor", "progress_tol"}
_RUN_KEYS = {"problem", "seed", "beta_min", "beta_max", "bits_per_var",
             "max_generations", "evolution", "repair", "penalty", "zoom"}


def _dataclass_from(d: Optional[dict], cls, allowed: set[str], context: str):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError(f"{context} must be a JSON object")
    _require_keys(d, allowed, context)
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def run_config_from_dict(data: dict, base_dir: Path,
                         seed_override: Optional[int] = None) -> RunConfig:
    _require_keys(data, _RUN_KEYS, "run config")
    if "problem" not in data:
        raise ConfigError("run config: missing 'problem'")
    problem = problem_from_spec(data["problem"], base_dir)

    penalty = None
    if data.get("penalty") is not None:
        pd = data["penalty"]
        if not isinstance(pd, dict):
            raise ConfigError("penalty must be a JSON object")
        _require_keys(pd, _PENALTY_KEYS, "penalty")
        try:
            penalty = PenaltyParams(C=pd["c"], lam=pd["lam"], K=pd["k"],
                                    q=pd["q"], eta=pd["eta"])
        except KeyError as exc:
            raise ConfigError(f"penalty: missing key {exc}") from exc

    seed = data.get("seed", 0)
    if seed_override is not None:
        seed = seed_override

    return RunConfig(
        problem=problem,
        seed=int(seed),
        beta_min=float(data.get("beta_min", 0.0)),
        beta_max=float(data.get("beta_max", 8.0)),
        bits_per_var=int(data.get("bits_per_var", 5)),
        max_generations=int(data.get("max_generations", 300)),
        evolution=_dataclass_from(data.get("evolution"), EvolutionConfig,
                                  _EVOLUTION_KEYS, "evolution"),
        repair=_dataclass_from(data.get("repair"), RepairConfig,
                               _REPAIR_KEYS, "repair"),
        penalty=penalty,
        zoom=_dataclass_from(data.get("zoom"), ZoomConfig, _ZOOM_KEYS, "zoom"),
    )


# ---------------------------------------------------------------------------
# Atomic file output
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value: Any) -> str:
    """CSV cell formatting: shortest round-trip floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_report_files(report: RunReport, out_dir: Path) -> None:
    _atomic_write(out_dir / "report.json",
                  json.dumps(report.to_json_dict(), indent=2) + "\n")
    history_rows = [
        (h.generation, h.stage, h.best_fitness, h.best_beta,
         h.region_diameter, h.distinct_fraction, h.evaluations)
        for h in report.history
    ]
    _atomic_write(out_dir / "history.csv", _csv_text(
        ("generation", "stage", "best_fitness", "best_beta",
         "region_diameter", "distinct_fraction", "evaluations"),
        history_rows))
    _atomic_write(out_dir / "regions.json", json.dumps(
        [r.to_json_dict() for r in report.region_history], indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    config = run_config_from_dict(data, Path(args.config).parent,
                                  seed_override=args.seed)
    out_dir = Path(args.out)
    try:
        report = run(config)
    except SurfaceNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.best_partial is not None:
            _atomic_write(out_dir / "best_partial.json",
                          json.dumps(exc.best_partial, indent=2) + "\n")
        return EXIT_SOLVER
    write_report_files(report, out_dir)
    print(f"beta_hl = {report.beta_hl:.6f}  p_f = {report.p_f:.6e}  "
          f"evaluations = {report.evaluations}  generations = {report.generations}")
    return EXIT_OK


_BENCH_KEYS = (_RUN_KEYS - {"problem", "seed"}) | {"benchmarks", "seeds"}


def _bench_cell(payload: tuple) -> dict:
    """One (benchmark, seed) cell; runs in a worker process."""
    spec, solver_data, base_dir, seed, label, oracle_beta = payload
    try:
        config = run_config_from_dict({**solver_data, "problem": spec},
                                      Path(base_dir), seed_override=seed)
        report = run(config)
    except HlriError as exc:
        return {"benchmark": label, "seed": seed,
                "status": type(exc).__name__, "beta_hl": None,
                "oracle_beta": oracle_beta, "rel_error": None,
                "evaluations": None, "generations": None,
                "t1": None, "t_diversity_end": None, "t_final": None}
    rel = None
    if oracle_beta:
        rel = abs(report.beta_hl - oracle_beta) / oracle_beta
    t1, t_div, t_final = report.stage_boundaries
    return {"benchmark": label, "seed": seed, "status": "ok",
            "beta_hl": report.beta_hl, "oracle_beta": oracle_beta,
            "rel_error": rel, "evaluations": report.evaluations,
            "generations": report.generations,
            "t1": t1, "t_diversity_end": t_div, "t_final": t_final}


def _parse_seed_range(text: str) -> list[int]:
    try:
        first, last = text.split("..")
        first, last = int(first), int(last)
    except ValueError as exc:
        raise ConfigError(f"--seeds must look like A..B, got {text!r}") from exc
    if last < first:
        raise ConfigError(f"--seeds range is empty: {text}")
    return list(range(first, last + 1))


def cmd_bench(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    _require_keys(data, _BENCH_KEYS, "bench config")
    specs = data.get("benchmarks")
    if not specs:
        raise ConfigError("bench config: missing or empty 'benchmarks' list")
    if args.seeds:
        seeds = _parse_seed_range(args.seeds)
    else:
        raw = data.get("seeds")
        if raw is None:
            raise ConfigError("bench config: missing 'seeds' [first, last] "
                              "(or pass --seeds A..B)")
        if not (isinstance(raw, list) and len(raw) == 2):
            raise ConfigError("bench config: 'seeds' must be [first, last]")
        seeds = list(range(int(raw[0]), int(raw[1]) + 1))

    solver_data = {k: v for k, v in data.items() if k not in ("benchmarks", "seeds")}
    base_dir = Path(args.config).parent

    payloads = []
    for spec in specs:
        problem = problem_from_spec(spec, base_dir)  # validates early
        label = spec.get("label", problem.name)
        oracle_beta = problem.known_beta
        if oracle_beta is None and problem.dimension <= 4:
            logger.info("computing brute-force reference for %s", label)
            oracle_beta = brute_force_mpp(
                problem, beta_cap=float(solver_data.get("beta_max", 8.0))).beta
        for seed in seeds:
            payloads.append((spec, solver_data, str(base_dir), seed, label,
                             oracle_beta))

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_cell, payloads))
    else:
        rows = [_bench_cell(p) for p in payloads]

    header = ("benchmark", "seed", "status", "beta_hl", "oracle_beta",
              "rel_error", "evaluations", "generations", "t1",
              "t_diversity_end", "t_final")
    out_dir = Path(args.out)
    _atomic_write(out_dir / "summary.csv", _csv_text(
        header, [[row[k] for k in header] for row in rows]))

    print(f"{'benchmark':<16} {'runs':>5} {'ok':>4} {'median rel err':>15} "
          f"{'p95 rel err':>12} {'median evals':>13}")
    for label in dict.fromkeys(r["benchmark"] for r in rows):
        cell = [r for r in rows if r["benchmark"] == label]
        ok = [r for r in cell if r["status"] == "ok"]
        errs = [r["rel_error"] for r in ok if r["rel_error"] is not None]
        evals = [r["evaluations"] for r in ok]
        med = f"{np.median(errs):.5f}" if errs else "-"
        p95 = f"{np.percentile(errs, 95):.5f}" if errs else "-"
        mev = f"{int(np.median(evals))}" if evals else "-"
        print(f"{label:<16} {len(cell):>5} {len(ok):>4} {med:>15} {p95:>12} {mev:>13}")
    return EXIT_OK


_ORACLE_KEYS = {"problem", "method", "resolution", "beta_cap", "tol", "y0",
                "max_iter"}


def cmd_oracle(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    _require_keys(data, _ORACLE_KEYS, "oracle config")
    if "problem" not in data:
        raise ConfigError("oracle config: missing 'problem'")
    problem = problem_from_spec(data["problem"], Path(args.config).parent)
    method = data.get("method", "brute_force")
    beta_cap = float(data.get("beta_cap", 8.0))
    tol = float(data.get("tol", 1e-6))

    if method == "brute_force":
        resolution = data.get("resolution")
        result = brute_force_mpp(problem, resolution=resolution,
                                 beta_cap=beta_cap, tol=tol)
    elif method == "hlrf":
        result = hlrf(problem, y0=data.get("y0"),
                      max_iter=int(data.get("max_iter", 100)),
                      tol=tol, beta_cap=beta_cap)
        if result is None:
            print("error: iteration diverged; no oracle result", file=sys.stderr)
            return EXIT_SOLVER
    elif method == "closed_form":
        result = closed_form_result(problem)
        if result is None:
            print(f"error: benchmark {problem.name!r} has no closed-form index",
                  file=sys.stderr)
            return EXIT_SOLVER
    else:
        raise ConfigError(f"oracle method must be brute_force, hlrf, or "
                          f"closed_form, got {method!r}")

    payload = {
        "benchmark": problem.name,
        "method": result.method,
        "beta": result.beta,
        "direction": [float(v) for v in result.direction],
        "evaluations": result.evaluations,
        "beta_cap": beta_cap,
        "tol": tol,
        "resolution": data.get("resolution"),
        "command": "hlri oracle --config " + Path(args.config).name,
    }
    out_path = Path(args.out) / ("oracle.json" if args.format == "json"
                                 else "oracle.csv")
    if args.format == "json":
        _atomic_write(out_path, json.dumps(payload, indent=2) + "\n")
    else:
        keys = list(payload)
        _atomic_write(out_path, _csv_text(
            keys, [[json.dumps(payload[k]) if isinstance(payload[k], list)
                    else payload[k] for k in keys]]))
    print(f"{result.method}: beta = {result.beta:.6f} "
          f"({result.evaluations} evaluations) -> {out_path}")
    return EXIT_OK


_TRACE_KEYS = {"problem", "direction", "beta0", "beta_max", "repair", "eta"}


def cmd_repair_trace(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    _require_keys(data, _TRACE_KEYS, "repair-trace config")
    for key in ("problem", "direction"):
        if key not in data:
            raise ConfigError(f"repair-trace config: missing {key!r}")
    problem = problem_from_spec(data["problem"], Path(args.config).parent)

    direction = np.asarray(data["direction"], dtype=float)
    norm = float(np.linalg.norm(direction))
    if abs(norm - 1.0) > 1e-9:
        raise ConfigError(f"direction must be a unit vector, |a| = {norm}")

    beta_max = float(data.get("beta_max", 8.0))
    repair_cfg = _dataclass_from(data.get("repair"), RepairConfig,
                                 _REPAIR_KEYS, "repair")
    eta = data.get("eta", repair_cfg.eta)
    if eta is None:
        g0 = evaluate_G(np.zeros(problem.dimension), problem)
        eta = default_penalty_params(g0, beta_max).eta
    repair_cfg = dataclasses.replace(repair_cfg, eta=float(eta))

    region = initial_region(0.0, beta_max, problem.dimension)
    bits = encode(direction, region, 5)
    genotype = MixedGenotype(beta=float(data.get("beta0", 0.0)), bits=bits,
                             direction=direction)
    outcome = repair(genotype, problem, repair_cfg, beta_max=beta_max)

    out_dir = Path(args.out)
    _atomic_write(out_dir / "trace.csv", _csv_text(
        ("k", "beta", "g", "delta_beta", "delta_max"),
        [(row.k, row.beta, row.g, row.delta_beta, row.delta_max)
         for row in outcome.trace]))
    summary = {
        "status": outcome.status,
        "mode": outcome.mode,
        "final_beta": outcome.final_beta,
        "final_g": outcome.final_g,
        "iterations": outcome.iterations,
    }
    _atomic_write(out_dir / "repair.json", json.dumps(summary, indent=2) + "\n")
    print(f"status = {outcome.status}  mode = {outcome.mode}  "
          f"final_beta = {outcome.final_beta:.6f}  final_g = {outcome.final_g:.3e}")
    return EXIT_OK


def cmd_validate_config(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    base_dir = Path(args.config).parent
    if "benchmarks" in data:
        _require_keys(data, _BENCH_KEYS, "bench config")
        for spec in data["benchmarks"]:
            problem_from_spec(spec, base_dir)
        kind = "bench"
    else:
        run_config_from_dict(data, base_dir)
        kind = "run"
    print(f"ok: valid {kind} config")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hlri",
        description="Reliability-index solver: evolutionary search for the "
                    "most probable failure point, plus validation oracles.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeds=False, workers=False, fmt=False):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        if seeds:
            p.add_argument("--seeds", default=None,
                           help="seed range A..B (overrides config)")
            if workers:
                p.add_argument("--workers", type=int, default=1,
                               help="parallel worker processes")
        else:
            p.add_argument("--seed", type=int, default=None,
                           help="seed override")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    common(sub.add_parser("run", help="solve one configured problem"))
    common(sub.add_parser("bench", help="sweep benchmarks x seeds"),
           seeds=True, workers=True)
    common(sub.add_parser("oracle", help="compute a ground-truth reference"),
           fmt=True)
    common(sub.add_parser("repair-trace", help="trace one repair iteration"))
    common(sub.add_parser("validate-config", help="validate a config file"))
    return parser


_COMMANDS = {
    "run": cmd_run,
    "bench": cmd_bench,
    "oracle": cmd_oracle,
    "repair-trace": cmd_repair_trace,
    "validate-config": cmd_validate_config,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("HLRI_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ContractError, DegenerateProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SurfaceNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
