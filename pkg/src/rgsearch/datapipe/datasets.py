"""Training-data pipelines: labeling, dedup, debias, active selection,
and preference-pair construction.

Solutions carry no id field, so all deterministic tie-breaking ("smaller
solution id") uses a solution's position in the input sequence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from ..backends.base import RewardBackend, score_solution
from ..core.answers import answers_match
from ..core.types import (
    CandidateSolution,
    DatasetKind,
    Label,
    LabeledDataset,
    LabeledEntry,
    PreferencePair,
    Problem,
)
from ..textops.solution import parse_solution


class UnknownProblem(KeyError):
    """A solution references a problem that is not in the input set."""


@dataclass(frozen=True)
class DedupConfig:
    ngram_n: int = 4
    overlap_threshold: float = 0.7
    similarity: str = "jaccard"

    def __post_init__(self) -> None:
        if self.ngram_n < 1:
            raise ValueError("ngram_n must be >= 1")
        if not 0.0 <= self.overlap_threshold <= 1.0:
            raise ValueError("overlap_threshold must lie in [0, 1]")
        if self.similarity != "jaccard":
            raise ValueError(f"unsupported similarity {self.similarity!r}")

    def to_dict(self) -> dict:
        return {
            "ngram_n": self.ngram_n,
            "overlap_threshold": self.overlap_threshold,
            "similarity": self.similarity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DedupConfig":
        defaults = cls()
        return cls(
            ngram_n=d.get("ngram_n", defaults.ngram_n),
            overlap_threshold=d.get("overlap_threshold", defaults.overlap_threshold),
            similarity=d.get("similarity", defaults.similarity),
        )


def _problem_index(problems: Sequence[Problem]) -> dict[str, Problem]:
    index = {}
    for problem in problems:
        if problem.id in index:
            raise ValueError(f"duplicate problem id {problem.id}")
        index[problem.id] = problem
    return index


def label_solutions(
    problems: Sequence[Problem], solutions: Sequence[CandidateSolution]
) -> LabeledDataset:
    """Label every solution against its problem's ground truth (dataset kind
    "original").

    A solution is correct iff its final answer matches the ground truth
    under canonical comparison; solutions with no final answer are
    incorrect. Raises UnknownProblem for unresolvable problem ids.
    """
    index = _problem_index(problems)
    entries = []
    for solution in solutions:
        problem = index.get(solution.problem_id)
        if problem is None:
            raise UnknownProblem(solution.problem_id)
        if problem.ground_truth is None:
            raise ValueError(f"problem {problem.id} has no ground truth")
        if solution.final_answer is not None and answers_match(solution.final_answer, problem.ground_truth):
            label = Label.CORRECT
        else:
            label = Label.INCORRECT
        entries.append(LabeledEntry(problem=problem, solution=solution.with_label(label)))
    return LabeledDataset(kind=DatasetKind.ORIGINAL, entries=tuple(entries))


def ngram_set(text: str, n: int) -> frozenset[tuple[str, ...]]:
    """Whitespace-split, lowercased token n-grams.

    Texts shorter than n tokens contribute their whole token tuple as a
    single gram, so byte-identical short texts still collide.
    """
    tokens = text.lower().split()
    if len(tokens) < n:
        return frozenset([tuple(tokens)])
    return frozenset(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def dedup_indices(texts: Sequence[str], config: DedupConfig | None = None) -> list[int]:
    """Positions surviving a greedy n-gram dedup scan in input order.

    A text is dropped iff its n-gram Jaccard similarity with any previously
    retained text exceeds the overlap threshold.
    """
    config = config or DedupConfig()
    retained: list[int] = []
    retained_grams: list[frozenset] = []
    for i, text in enumerate(texts):
        grams = ngram_set(text, config.ngram_n)
        if any(jaccard(grams, kept) > config.overlap_threshold for kept in retained_grams):
            continue
        retained.append(i)
        retained_grams.append(grams)
    return retained


def dedup(
    solutions: Sequence[CandidateSolution], config: DedupConfig | None = None
) -> list[CandidateSolution]:
    """Greedy n-gram dedup of solutions in input order (order preserved)."""
    keep = dedup_indices([s.raw_text for s in solutions], config)
    return [solutions[i] for i in keep]


def _split_by_label(entries: Sequence[LabeledEntry]) -> tuple[list[LabeledEntry], list[LabeledEntry]]:
    correct = [e for e in entries if e.solution.label == Label.CORRECT]
    incorrect = [e for e in entries if e.solution.label == Label.INCORRECT]
    return correct, incorrect


def debias(dataset: LabeledDataset, seed: int = 0) -> LabeledDataset:
    """Balance labels per problem by seeded random subsampling (kind "cleaned").

    For each problem, min(#correct, #incorrect) entries of each label are
    retained; problems with no representatives of one label are dropped
    entirely. The per-problem RNG is derived from (seed, problem id), so
    retention is replayable and independent of problem order.
    """
    out: list[LabeledEntry] = []
    for problem_id, entries in dataset.by_problem().items():
        correct_idx = [i for i, e in enumerate(entries) if e.solution.label == Label.CORRECT]
        incorrect_idx = [i for i, e in enumerate(entries) if e.solution.label == Label.INCORRECT]
        m = min(len(correct_idx), len(incorrect_idx))
        if m == 0:
            continue
        rng = random.Random(f"{seed}:{problem_id}")
        keep = sorted(rng.sample(correct_idx, m) + rng.sample(incorrect_idx, m))
        out.extend(entries[i] for i in keep)
    return LabeledDataset(kind=DatasetKind.CLEANED, entries=tuple(out))


def clean_dataset(
    dataset: LabeledDataset, dedup_config: DedupConfig | None = None, seed: int = 0
) -> LabeledDataset:
    """Per-problem dedup followed by debias: the standard cleaning pass."""
    dedup_config = dedup_config or DedupConfig()
    deduped: list[LabeledEntry] = []
    for _, entries in dataset.by_problem().items():
        keep = dedup_indices([e.solution.raw_text for e in entries], dedup_config)
        deduped.extend(entries[i] for i in keep)
    return debias(LabeledDataset(kind=dataset.kind, entries=tuple(deduped)), seed=seed)


def _scored_entries(
    entries: Sequence[LabeledEntry], reward: RewardBackend
) -> list[LabeledEntry]:
    scored = []
    for entry in entries:
        score = score_solution(reward, entry.problem, entry.solution)
        scored.append(LabeledEntry(entry.problem, entry.solution.with_score(score.normalized_yes)))
    return scored


def active_select(
    dataset: LabeledDataset,
    reward: RewardBackend,
    top_m: int,
    dedup_config: DedupConfig | None = None,
) -> LabeledDataset:
    """Select the highest-scoring correct and incorrect solutions per problem
    (dataset kind "active_learning").

    Every solution is scored, each label split is sorted by descending
    normalized score (ties keep input order, i.e. the smaller position
    wins), and the top_m of each split survive. The splits are then deduped
    in rank order and truncated to equal length; problems losing one whole
    split are dropped.
    """
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    dedup_config = dedup_config or DedupConfig()
    out: list[LabeledEntry] = []
    for _, entries in dataset.by_problem().items():
        scored = _scored_entries(entries, reward)
        correct, incorrect = _split_by_label(scored)
        selected_sides = []
        for side in (correct, incorrect):
            ranked = sorted(side, key=lambda e: -(e.solution.rm_score or 0.0))
            top = ranked[:top_m]
            keep = dedup_indices([e.solution.raw_text for e in top], dedup_config)
            selected_sides.append([top[i] for i in keep])
        m = min(len(selected_sides[0]), len(selected_sides[1]))
        if m == 0:
            continue
        out.extend(selected_sides[0][:m])
        out.extend(selected_sides[1][:m])
    return LabeledDataset(kind=DatasetKind.ACTIVE_LEARNING, entries=tuple(out))


def _well_formed(solution: CandidateSolution) -> bool:
    """Rule filter: text must re-parse and carry a final answer."""
    try:
        parsed = parse_solution(solution.raw_text)
    except ValueError:
        return False
    return parsed.final_answer is not None


def build_preference_pairs(
    problems: Sequence[Problem],
    solutions: Sequence[CandidateSolution],
    reward: RewardBackend,
) -> list[PreferencePair]:
    """One (best correct, best incorrect) pair per eligible problem.

    Malformed solutions are rule-filtered out; only problems with both
    labels remain; the reward model scores the survivors and the
    highest-scored solution of each label forms the pair (ties keep the
    earlier solution). Pairs come back ordered by problem id.
    """
    filtered = [s for s in solutions if _well_formed(s)]
    labeled = label_solutions(problems, filtered)
    grouped = labeled.by_problem()
    pairs = []
    for problem_id in sorted(grouped):
        entries = grouped[problem_id]
        scored = _scored_entries(entries, reward)
        correct, incorrect = _split_by_label(scored)
        if not correct or not incorrect:
            continue
        best_pos = max(correct, key=lambda e: e.solution.rm_score or 0.0)
        best_neg = max(incorrect, key=lambda e: e.solution.rm_score or 0.0)
        pairs.append(
            PreferencePair(
                problem=best_pos.problem,
                positive=best_pos.solution,
                negative=best_neg.solution,
            )
        )
    return pairs
