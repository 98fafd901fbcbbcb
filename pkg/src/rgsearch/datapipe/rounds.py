"""One round of the policy/reward co-training loop, with pluggable trainers.

Actual weight updates are out of scope at desk scale: trainers are stubs
that map (backend, dataset) -> backend. The identity stub returns its input
unchanged; real fine-tuning integrates by implementing TrainerStub against
the same interface.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..backends.base import PolicyBackend, RewardBackend, SolutionPrefix, score_solution
from ..core.types import CandidateSolution, Label, LabeledDataset, PreferencePair, Problem
from .datasets import DedupConfig, active_select, build_preference_pairs, clean_dataset, label_solutions


class TrainerStub(ABC):
    """Maps a backend and its training data to the next-round backend."""

    name: str = "trainer"

    @abstractmethod
    def train(self, backend: Any, data: Any) -> Any:
        ...


class IdentityTrainer(TrainerStub):
    """Returns the backend unchanged; the desk-scale default."""

    name = "identity"

    def train(self, backend: Any, data: Any) -> Any:
        return backend


class ReplacementTrainer(TrainerStub):
    """Swaps in a fixed replacement backend, ignoring the data.

    Useful for modeling "training made the model better" in tests, e.g.
    replacing a noisy reward with an oracle one.
    """

    name = "replacement"

    def __init__(self, replacement: Any) -> None:
        self.replacement = replacement

    def train(self, backend: Any, data: Any) -> Any:
        return self.replacement


@dataclass
class Trainers:
    reward_trainer: TrainerStub = field(default_factory=IdentityTrainer)
    policy_trainer: TrainerStub = field(default_factory=IdentityTrainer)


@dataclass
class RoundReport:
    """Sizes and score statistics produced by one co-training round."""

    candidates: int
    original_size: int
    cleaned_size: int
    active_size: int | None
    pair_count: int
    score_stats: dict[str, dict[str, float]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "candidates": self.candidates,
            "original_size": self.original_size,
            "cleaned_size": self.cleaned_size,
            "active_size": self.active_size,
            "pair_count": self.pair_count,
            "score_stats": self.score_stats,
        }


def sample_candidates(
    policy: PolicyBackend, problems: Sequence[Problem], samples_per_problem: int
) -> list[CandidateSolution]:
    """Complete rollouts from scratch for every problem."""
    candidates = []
    for problem in problems:
        prefix = SolutionPrefix(problem=problem)
        for _ in range(samples_per_problem):
            candidates.append(policy.rollout(prefix))
    return candidates


def _score_stats(reward: RewardBackend, dataset: LabeledDataset) -> dict[str, dict[str, float]]:
    by_label: dict[str, list[float]] = {Label.CORRECT.value: [], Label.INCORRECT.value: []}
    for entry in dataset.entries:
        score = score_solution(reward, entry.problem, entry.solution)
        by_label[entry.solution.label.value].append(score.normalized_yes)
    stats = {}
    for label, scores in by_label.items():
        if scores:
            stats[label] = {
                "count": float(len(scores)),
                "mean": math.fsum(scores) / len(scores),
                "min": min(scores),
                "max": max(scores),
            }
        else:
            stats[label] = {"count": 0.0, "mean": 0.0, "min": 0.0, "max": 0.0}
    return stats


def iterate_round(
    policy: PolicyBackend,
    reward: RewardBackend,
    problems: Sequence[Problem],
    trainers: Trainers | None = None,
    samples_per_problem: int = 8,
    dedup_config: DedupConfig | None = None,
    seed: int = 0,
    active_top_m: int | None = None,
) -> tuple[PolicyBackend, RewardBackend, RoundReport, list[PreferencePair]]:
    """Run one co-training round and return the next-round backends.

    The sequence: the policy samples candidates for every problem; labeling
    yields the original dataset; cleaning (dedup + debias) yields the
    training dataset; optionally active selection (scored by the current
    reward) picks the hard subset; the reward trainer produces the next
    reward model; the new reward model scores the original candidates to
    build preference pairs; the policy trainer produces the next policy.
    """
    trainers = trainers or Trainers()
    dedup_config = dedup_config or DedupConfig()

    candidates = sample_candidates(policy, problems, samples_per_problem)
    original = label_solutions(problems, candidates)
    cleaned = clean_dataset(original, dedup_config, seed=seed)

    active: LabeledDataset | None = None
    if active_top_m is not None:
        active = active_select(original, reward, active_top_m, dedup_config)

    reward_data = active if active is not None else cleaned
    next_reward: RewardBackend = trainers.reward_trainer.train(reward, reward_data)

    pairs = build_preference_pairs(problems, candidates, next_reward)
    next_policy: PolicyBackend = trainers.policy_trainer.train(policy, pairs)

    report = RoundReport(
        candidates=len(candidates),
        original_size=len(original.entries),
        cleaned_size=len(cleaned.entries),
        active_size=len(active.entries) if active is not None else None,
        pair_count=len(pairs),
        score_stats=_score_stats(next_reward, original),
    )
    return next_policy, next_reward, report, pairs
