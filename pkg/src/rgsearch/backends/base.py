"""Policy and reward backend interfaces plus reward-score normalization."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

from ..core.types import CandidateSolution, Problem, RewardScore, Step
from ..textops.solution import format_steps, has_final_answer

# A rollout that has not produced a final answer after this many generated
# steps is treated as non-terminating.
MAX_ROLLOUT_STEPS = 40


class BackendError(RuntimeError):
    pass


class BackendUnavailable(BackendError):
    """Network failure, timeout, or server error."""


class FormatError(BackendError):
    """Generation stayed unparseable after the retry budget."""


class MissingProbabilities(BackendError):
    """The server returned no usable Yes/No token probabilities."""


class NonTerminating(BackendError):
    """A rollout exceeded MAX_ROLLOUT_STEPS without a final answer."""


@dataclass(frozen=True)
class PolicyCapabilities:
    supports_step_generation: bool = True
    supports_rollout: bool = True
    max_batch: int = 1


@dataclass(frozen=True)
class RewardCapabilities:
    returns_token_probabilities: bool = True


@dataclass(frozen=True)
class SolutionPrefix:
    """The solution-so-far along one tree path: problem, rephrasing, steps."""

    problem: Problem
    rephrasing: str = ""
    steps: tuple[Step, ...] = ()

    def text(self) -> str:
        return format_steps(self.rephrasing, self.steps)

    def is_terminal(self) -> bool:
        """Terminal iff the final-answer extractor succeeds on the prefix."""
        return has_final_answer(self.text())

    def extended(self, step: Step) -> SolutionPrefix:
        return replace(self, steps=self.steps + (step,))

    @property
    def depth(self) -> int:
        return len(self.steps)


class PolicyBackend(ABC):
    """A generator of reasoning steps and complete rollouts."""

    capabilities: PolicyCapabilities = PolicyCapabilities()

    @abstractmethod
    def generate_steps(self, prefix: SolutionPrefix, k: int) -> list[Step]:
        """Propose exactly ``k`` candidate next steps (duplicates allowed).

        The prefix must not be terminal. Candidates that would finish the
        solution carry their boxed answer inside the step body.
        """

    @abstractmethod
    def rollout(self, prefix: SolutionPrefix) -> CandidateSolution:
        """Complete the prefix into a full solution ending in a final-answer
        block. An already-terminal prefix closes immediately with no new
        steps."""


class RewardBackend(ABC):
    """A scorer assessing solution correctness via Yes/No probabilities."""

    capabilities: RewardCapabilities = RewardCapabilities()

    @abstractmethod
    def assess(self, problem: Problem, solution: CandidateSolution) -> tuple[float, float]:
        """Raw probabilities (p_yes, p_no) for the Yes/No assessment tokens."""

    def score(self, problem: Problem, solution: CandidateSolution) -> RewardScore:
        p_yes, p_no = self.assess(problem, solution)
        return reward_score(p_yes, p_no)


def normalize_reward(p_yes: float, p_no: float) -> tuple[float, float]:
    """Softmax over the raw Yes/No probabilities so the pair sums to 1.

    normalized_yes = e^p_yes / (e^p_yes + e^p_no). For raw inputs in
    [0, 1]^2 the output lies in [1/(1+e), e/(1+e)], and the argmax over any
    candidate set is invariant under this map.
    """
    normalized_yes = 1.0 / (1.0 + math.exp(p_no - p_yes))
    return normalized_yes, 1.0 - normalized_yes


def reward_score(p_yes: float, p_no: float) -> RewardScore:
    normalized_yes, normalized_no = normalize_reward(p_yes, p_no)
    return RewardScore(p_yes=p_yes, p_no=p_no, normalized_yes=normalized_yes, normalized_no=normalized_no)


def generate_steps(backend: PolicyBackend, prefix: SolutionPrefix, k: int) -> list[Step]:
    """Ask ``backend`` for k candidate next steps."""
    if k < 1:
        raise ValueError("k must be >= 1")
    steps = backend.generate_steps(prefix, k)
    if len(steps) != k:
        raise FormatError(f"backend returned {len(steps)} candidates, requested {k}")
    return steps


def rollout(backend: PolicyBackend, prefix: SolutionPrefix) -> CandidateSolution:
    """Complete ``prefix`` into a full solution via ``backend``."""
    return backend.rollout(prefix)


def score_solution(backend: RewardBackend, problem: Problem, solution: CandidateSolution) -> RewardScore:
    """Score one solution, returning raw and normalized Yes/No probabilities."""
    if not solution.raw_text:
        raise ValueError("solution has no raw_text to score")
    return backend.score(problem, solution)
