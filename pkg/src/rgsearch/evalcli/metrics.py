"""Evaluation metrics: accuracy, maj@k, pass@k, best-of-N, and reports."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..core.answers import answers_match, canonical_answer
from ..core.types import CandidateSolution


@dataclass(frozen=True)
class ProblemRecord:
    """Per-problem evaluation data: the chosen answer plus raw samples."""

    problem_id: str
    ground_truth: str
    answer: str | None = None
    sample_answers: tuple[str | None, ...] = ()
    sample_scores: tuple[float, ...] = ()

    @property
    def correct(self) -> bool:
        return answers_match(self.answer, self.ground_truth)

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "ground_truth": self.ground_truth,
            "answer": self.answer,
            "correct": self.correct,
            "sample_answers": list(self.sample_answers),
            "sample_scores": list(self.sample_scores),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ProblemRecord":
        return cls(
            problem_id=d["problem_id"],
            ground_truth=d["ground_truth"],
            answer=d.get("answer"),
            sample_answers=tuple(d.get("sample_answers", [])),
            sample_scores=tuple(d.get("sample_scores", [])),
        )


def accuracy(records: Sequence[ProblemRecord]) -> float:
    """Fraction of records whose answer matches the ground truth."""
    if not records:
        return 0.0
    return sum(1 for r in records if r.correct) / len(records)


def majority_answer(answers: Sequence[str | None]) -> str | None:
    """Plurality canonical answer; ties break to the smallest answer string."""
    counts = Counter(
        key for key in (canonical_answer(a) for a in answers) if key is not None
    )
    if not counts:
        return None
    top = max(counts.values())
    return min(answer for answer, count in counts.items() if count == top)


def maj_at_k(answers: Sequence[str | None], ground_truth: str) -> int:
    """1 iff the plurality canonical answer equals the ground truth."""
    if not answers:
        raise ValueError("maj_at_k requires at least one answer")
    winner = majority_answer(answers)
    return 1 if winner is not None and answers_match(winner, ground_truth) else 0


def pass_at_k(answers: Sequence[str | None], ground_truth: str) -> int:
    """1 iff any answer matches the ground truth."""
    if not answers:
        raise ValueError("pass_at_k requires at least one answer")
    return 1 if any(answers_match(a, ground_truth) for a in answers) else 0


def bon_pick(answers: Sequence[str | None], scores: Sequence[float]) -> int:
    """Index of the best-of-N choice: max score, ties to the smallest index."""
    if not answers or len(answers) != len(scores):
        raise ValueError("answers and scores must be nonempty and aligned")
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def best_of_n(solutions: Sequence[CandidateSolution], ground_truth: str) -> int:
    """1 iff the highest-reward solution is correct (ties to the earliest)."""
    if not solutions:
        raise ValueError("best_of_n requires at least one solution")
    if any(s.rm_score is None for s in solutions):
        raise ValueError("best_of_n requires every solution to be scored")
    pick = bon_pick([s.final_answer for s in solutions], [s.rm_score or 0.0 for s in solutions])
    return 1 if answers_match(solutions[pick].final_answer, ground_truth) else 0


@dataclass
class EvalReport:
    """Aggregated evaluation results for one method on one dataset."""

    dataset: str
    method: str
    records: tuple[ProblemRecord, ...]
    aggregates: dict[str, float] = field(default_factory=dict)
    runtime: dict[str, float] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        dataset: str,
        method: str,
        records: Sequence[ProblemRecord],
        k_values: Sequence[int] = (),
        bon_values: Sequence[int] = (),
        runtime: dict[str, float] | None = None,
    ) -> "EvalReport":
        records = tuple(sorted(records, key=lambda r: r.problem_id))
        aggregates = compute_aggregates(records, k_values, bon_values)
        return cls(
            dataset=dataset,
            method=method,
            records=records,
            aggregates=aggregates,
            runtime=dict(runtime or {}),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "method": self.method,
            "records": [r.to_dict() for r in self.records],
            "aggregates": dict(self.aggregates),
            "runtime": dict(self.runtime),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EvalReport":
        return cls(
            dataset=d["dataset"],
            method=d["method"],
            records=tuple(ProblemRecord.from_dict(r) for r in d.get("records", [])),
            aggregates=dict(d.get("aggregates", {})),
            runtime=dict(d.get("runtime", {})),
        )


def compute_aggregates(
    records: Sequence[ProblemRecord],
    k_values: Sequence[int] = (),
    bon_values: Sequence[int] = (),
) -> dict[str, float]:
    """Recompute every aggregate from per-problem records."""
    aggregates: dict[str, float] = {"accuracy": accuracy(records)}
    for k in k_values:
        usable = [r for r in records if len(r.sample_answers) >= k]
        if not usable:
            continue
        aggregates[f"maj@{k}"] = math.fsum(
            maj_at_k(r.sample_answers[:k], r.ground_truth) for r in usable
        ) / len(usable)
        aggregates[f"pass@{k}"] = math.fsum(
            pass_at_k(r.sample_answers[:k], r.ground_truth) for r in usable
        ) / len(usable)
    for n in bon_values:
        usable = [
            r for r in records if len(r.sample_answers) >= n and len(r.sample_scores) >= n
        ]
        if not usable:
            continue
        hits = 0
        for r in usable:
            pick = bon_pick(r.sample_answers[:n], r.sample_scores[:n])
            hits += 1 if answers_match(r.sample_answers[pick], r.ground_truth) else 0
        aggregates[f"bon@{n}"] = hits / len(usable)
    return aggregates


def comparison_table(reports: Sequence[EvalReport], baseline_method: str | None = None) -> str:
    """Plain-text table: method rows, accuracy and gain-over-baseline columns."""
    baseline_acc = None
    if baseline_method is not None:
        for report in reports:
            if report.method == baseline_method:
                baseline_acc = report.aggregates.get("accuracy")
    lines = [f"{'method':<16}{'dataset':<16}{'acc (%)':>10}{'gain (%)':>10}"]
    for report in reports:
        acc = report.aggregates.get("accuracy", 0.0)
        if baseline_acc:
            gain = f"{100.0 * (acc - baseline_acc) / baseline_acc:+.1f}"
        else:
            gain = "-"
        lines.append(f"{report.method:<16}{report.dataset:<16}{100.0 * acc:>10.1f}{gain:>10}")
    return "\n".join(lines)
