"""Benchmark driver: run a method over a problem set and build a report."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from ..backends.base import SolutionPrefix, score_solution
from ..core.types import Problem
from ..search.engine import run_search
from .config import AppConfig
from .metrics import EvalReport, ProblemRecord, bon_pick

METHODS = ("cot", "bon", "search")


def _solve_cot(config: AppConfig, problem: Problem, run_seed: int, samples: int) -> ProblemRecord:
    policy, _ = config.backend.make_backends(run_seed)
    prefix = SolutionPrefix(problem=problem)
    answers = [policy.rollout(prefix).final_answer for _ in range(samples)]
    return ProblemRecord(
        problem_id=problem.id,
        ground_truth=problem.ground_truth or "",
        answer=answers[0],
        sample_answers=tuple(answers),
    )


def _solve_bon(config: AppConfig, problem: Problem, run_seed: int, samples: int) -> ProblemRecord:
    policy, reward = config.backend.make_backends(run_seed)
    prefix = SolutionPrefix(problem=problem)
    answers: list[str | None] = []
    scores: list[float] = []
    for _ in range(samples):
        solution = policy.rollout(prefix)
        answers.append(solution.final_answer)
        scores.append(score_solution(reward, problem, solution).normalized_yes)
    pick = bon_pick(answers, scores)
    return ProblemRecord(
        problem_id=problem.id,
        ground_truth=problem.ground_truth or "",
        answer=answers[pick],
        sample_answers=tuple(answers),
        sample_scores=tuple(scores),
    )


def _solve_search(config: AppConfig, problem: Problem, run_seed: int) -> ProblemRecord:
    policy, reward = config.backend.make_backends(run_seed)
    outcome = run_search(problem, config.search, policy, reward)
    return ProblemRecord(
        problem_id=problem.id,
        ground_truth=problem.ground_truth or "",
        answer=outcome.answer,
    )


def bench_problems(
    config: AppConfig,
    problems: Sequence[Problem],
    method: str,
    dataset_name: str = "problems",
    samples: int | None = None,
    k_values: Sequence[int] = (),
    bon_values: Sequence[int] = (),
) -> EvalReport:
    """Run ``method`` over every problem and aggregate a report.

    Each problem gets its own backend instances seeded from the configured
    rng_seed plus the problem's position, so results are independent of
    worker-pool scheduling and the reduce is a deterministic order by
    problem id.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    samples = samples if samples is not None else config.bench.samples
    base_seed = config.search.rng_seed

    def solve(index_problem: tuple[int, Problem]) -> ProblemRecord:
        index, problem = index_problem
        run_seed = base_seed + index
        if method == "cot":
            return _solve_cot(config, problem, run_seed, samples)
        if method == "bon":
            return _solve_bon(config, problem, run_seed, samples)
        return _solve_search(config, problem, run_seed)

    started = time.monotonic()
    tasks = list(enumerate(problems))
    if config.bench.workers > 1:
        with ThreadPoolExecutor(max_workers=config.bench.workers) as pool:
            records = list(pool.map(solve, tasks))
    else:
        records = [solve(task) for task in tasks]
    wall = time.monotonic() - started

    return EvalReport.build(
        dataset=dataset_name,
        method=method,
        records=records,
        k_values=k_values,
        bon_values=bon_values,
        runtime={"wall_time_s": wall, "problems": float(len(problems))},
    )
