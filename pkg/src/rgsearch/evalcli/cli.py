"""Command-line interface.

Subcommands: solve, bench, build-rm-data, build-pref-pairs, select-active,
iterate, eval. Every run writes a manifest (config, seed, git describe,
timing); wall-clock timestamps live only there so trace and data files stay
byte-reproducible. Exit codes: 0 success, 1 config error, 2 backend
failure; machine-readable errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import subprocess
import sys
import time
from pathlib import Path
from typing import Any

from ..backends.base import BackendError
from ..core.types import Problem
from ..datapipe.datasets import active_select, build_preference_pairs, clean_dataset, label_solutions
from ..datapipe.io import (
    dataset_manifest,
    read_dataset,
    read_jsonl,
    read_problems,
    read_solutions,
    write_dataset,
    write_pairs,
)
from ..datapipe.rounds import Trainers, iterate_round
from ..search.engine import run_search
from .bench import METHODS, bench_problems
from .config import AppConfig, ConfigError, load_config
from .metrics import EvalReport, ProblemRecord, comparison_table

LOG_ENV = "STILL_LOG"

log = logging.getLogger("rgsearch.cli")


def _setup_logging() -> None:
    level_name = os.environ.get(LOG_ENV, "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, check=False,
        )
        return out.stdout.strip() or "unknown"
    except OSError:
        return "unknown"


def _write_manifest(out_dir: Path, config: AppConfig, started: float, extra: dict[str, Any]) -> None:
    manifest = {
        "config": config.to_dict(),
        "seed": config.search.rng_seed,
        "git_describe": _git_describe(),
        "argv": sys.argv[1:],
        "started_unix": started,
        "wall_time_s": time.time() - started,
    }
    manifest.update(extra)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_problem_file(path: str) -> list[Problem]:
    """A problems JSONL file, or a JSON file holding one problem object."""
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return read_problems(path)
    if isinstance(data, dict):
        return [Problem.from_dict(data)]
    return [Problem.from_dict(d) for d in data]


def _search_overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "algorithm", None) is not None:
        overrides["algorithm"] = args.algorithm
    if getattr(args, "budget", None) is not None:
        overrides["step_budget"] = args.budget
    return overrides


def _config_from_args(args: argparse.Namespace) -> AppConfig:
    overrides: dict[str, dict[str, Any]] = {"search": _search_overrides(args)}
    if getattr(args, "workers", None) is not None:
        overrides["bench"] = {"workers": args.workers}
    return load_config(getattr(args, "config", None), overrides)


def cmd_solve(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    problems = _load_problem_file(args.problem)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outcomes = []
    for index, problem in enumerate(problems):
        policy, reward = config.backend.make_backends(config.search.rng_seed + index)
        trace_path = out_dir / f"trace-{problem.id}.jsonl"
        outcome = run_search(problem, config.search, policy, reward, trace_path=str(trace_path))
        outcomes.append(outcome)
        print(f"{problem.id}\t{outcome.answer}\tsteps={outcome.steps_used}")
    with open(out_dir / "outcome.json", "w", encoding="utf-8") as f:
        json.dump([o.to_dict() for o in outcomes], f, indent=2, sort_keys=True)
        f.write("\n")
    _write_manifest(out_dir, config, started, {"command": "solve", "problems": len(problems)})
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    problems = read_problems(args.problems)
    k_values = args.k or []
    bon_values = args.n or []
    report = bench_problems(
        config,
        problems,
        method=args.method,
        dataset_name=Path(args.problems).stem,
        samples=args.samples,
        k_values=k_values,
        bon_values=bon_values,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    table = comparison_table([report])
    (out_dir / "report.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    _write_manifest(out_dir, config, started, {"command": "bench", "method": args.method})
    return 0


def cmd_build_rm_data(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    problems = read_problems(args.problems)
    solutions = read_solutions(args.solutions)
    original = label_solutions(problems, solutions)
    cleaned = clean_dataset(original, config.dedup, seed=config.search.rng_seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_dataset(out_dir / "original.jsonl", original)
    write_dataset(out_dir / "cleaned.jsonl", cleaned)
    manifest = dataset_manifest(
        kind="cleaned",
        seed=config.search.rng_seed,
        config=config.dedup.to_dict(),
        sources=[args.problems, args.solutions],
    )
    with open(out_dir / "dataset_manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"original={len(original.entries)} cleaned={len(cleaned.entries)}")
    _write_manifest(out_dir, config, started, {"command": "build-rm-data"})
    return 0


def cmd_build_pref_pairs(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    problems = read_problems(args.problems)
    solutions = read_solutions(args.solutions)
    _, reward = config.backend.make_backends(config.search.rng_seed)
    pairs = build_preference_pairs(problems, solutions, reward)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_pairs(out_dir / "pairs.jsonl", pairs)
    print(f"pairs={len(pairs)}")
    _write_manifest(out_dir, config, started, {"command": "build-pref-pairs", "pairs": len(pairs)})
    return 0


def cmd_select_active(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    dataset = read_dataset(args.dataset, kind="original")
    _, reward = config.backend.make_backends(config.search.rng_seed)
    selected = active_select(dataset, reward, args.top_m, config.dedup)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_dataset(out_dir / "active.jsonl", selected)
    print(f"active={len(selected.entries)}")
    _write_manifest(out_dir, config, started, {"command": "select-active", "top_m": args.top_m})
    return 0


def cmd_iterate(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    problems = read_problems(args.problems)
    policy, reward = config.backend.make_backends(config.search.rng_seed)
    _, _, report, pairs = iterate_round(
        policy,
        reward,
        problems,
        trainers=Trainers(),
        samples_per_problem=args.samples,
        dedup_config=config.dedup,
        seed=config.search.rng_seed,
        active_top_m=args.top_m,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_pairs(out_dir / "pairs.jsonl", pairs)
    with open(out_dir / "round_report.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    print(json.dumps(report.to_dict(), sort_keys=True))
    _write_manifest(out_dir, config, started, {"command": "iterate"})
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.time()
    config = _config_from_args(args)
    records = [ProblemRecord.from_dict(d) for d in read_jsonl(args.records)]
    report = EvalReport.build(
        dataset=Path(args.records).stem,
        method=args.method,
        records=records,
        k_values=args.k or [],
        bon_values=args.n or [],
    )
    reports = [report]
    baseline_method = None
    if args.baseline is not None:
        baseline_records = [ProblemRecord.from_dict(d) for d in read_jsonl(args.baseline)]
        baseline = EvalReport.build(
            dataset=Path(args.baseline).stem,
            method="baseline",
            records=baseline_records,
            k_values=args.k or [],
            bon_values=args.n or [],
        )
        reports = [baseline, report]
        baseline_method = "baseline"
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    table = comparison_table(reports, baseline_method=baseline_method)
    (out_dir / "report.txt").write_text(table + "\n", encoding="utf-8")
    print(json.dumps(report.aggregates, sort_keys=True))
    _write_manifest(out_dir, config, started, {"command": "eval"})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None, help="override search.rng_seed")
        p.add_argument("--out", type=str, default="out", help="output directory")

    p_solve = sub.add_parser("solve", help="run tree search on one problem file")
    common(p_solve)
    p_solve.add_argument("--problem", type=str, required=True, help="problem JSON or JSONL file")
    p_solve.add_argument("--algorithm", choices=["mcts", "mcts_g", "beam"], default=None)
    p_solve.add_argument("--budget", type=int, default=None, help="override step budget")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="evaluate a method over a problem set")
    common(p_bench)
    p_bench.add_argument("--problems", type=str, required=True)
    p_bench.add_argument("--method", choices=METHODS, required=True)
    p_bench.add_argument("--samples", type=int, default=None, help="samples per problem (cot/bon)")
    p_bench.add_argument("--algorithm", choices=["mcts", "mcts_g", "beam"], default=None)
    p_bench.add_argument("--budget", type=int, default=None)
    p_bench.add_argument("--workers", type=int, default=None)
    p_bench.add_argument("--k", type=int, action="append", help="report maj@k and pass@k")
    p_bench.add_argument("--n", type=int, action="append", help="report bon@n")
    p_bench.set_defaults(func=cmd_bench)

    p_rm = sub.add_parser("build-rm-data", help="label and clean solutions into RM datasets")
    common(p_rm)
    p_rm.add_argument("--problems", type=str, required=True)
    p_rm.add_argument("--solutions", type=str, required=True)
    p_rm.set_defaults(func=cmd_build_rm_data)

    p_pairs = sub.add_parser("build-pref-pairs", help="build preference pairs from solutions")
    common(p_pairs)
    p_pairs.add_argument("--problems", type=str, required=True)
    p_pairs.add_argument("--solutions", type=str, required=True)
    p_pairs.set_defaults(func=cmd_build_pref_pairs)

    p_active = sub.add_parser("select-active", help="actively select hard training instances")
    common(p_active)
    p_active.add_argument("--dataset", type=str, required=True, help="labeled dataset JSONL")
    p_active.add_argument("--top-m", type=int, required=True)
    p_active.set_defaults(func=cmd_select_active)

    p_iter = sub.add_parser("iterate", help="run one co-training round with identity trainers")
    common(p_iter)
    p_iter.add_argument("--problems", type=str, required=True)
    p_iter.add_argument("--samples", type=int, default=8, help="candidates per problem")
    p_iter.add_argument("--top-m", type=int, default=None, help="enable active selection")
    p_iter.set_defaults(func=cmd_iterate)

    p_eval = sub.add_parser("eval", help="aggregate metrics from a records file")
    common(p_eval)
    p_eval.add_argument("--records", type=str, required=True)
    p_eval.add_argument("--method", type=str, default="records")
    p_eval.add_argument("--k", type=int, action="append")
    p_eval.add_argument("--n", type=int, action="append")
    p_eval.add_argument("--baseline", type=str, default=None, help="baseline records file for gain computation")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 1
    except BackendError as exc:
        print(json.dumps({"error": str(exc), "kind": "backend"}), file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
