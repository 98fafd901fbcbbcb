"""Deterministic scripted policy and reward backends for tests and benches.

A :class:`ScriptedWorld` defines a synthetic solution landscape: a full
``branching``-ary step tree of fixed ``depth`` per problem, with exactly one
root-to-leaf path producing the problem's ground-truth answer. Every step
text, branch ordering, and leaf answer is a pure function of the world seed,
so identical seeds and call sequences replay byte-identically.

Wrong leaves either carry a unique wrong answer each (the default) or draw
from a small distractor pool, which makes self-consistency genuinely
misleading on error-prone configurations. Steps off the correct path can be
salted with wrong in-step arithmetic at ``step_error_rate`` to exercise
calculator verification.
"""

from __future__ import annotations

import hashlib
import random
import re

from ..core.answers import answers_match
from ..core.types import CandidateSolution, Problem, Step
from ..textops.solution import extract_boxed, format_solution
from .base import (
    MAX_ROLLOUT_STEPS,
    NonTerminating,
    PolicyBackend,
    PolicyCapabilities,
    RewardBackend,
    SolutionPrefix,
)

_BRANCH_RE = re.compile(r"branch (\d+)$")


def _stable_rng(*parts: object) -> random.Random:
    """A Random seeded from a platform-stable hash of the given parts."""
    key = "\x1f".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


class ScriptedWorld:
    """A seeded synthetic solution space with one designated correct path."""

    def __init__(
        self,
        seed: int,
        branching: int = 3,
        depth: int = 4,
        distractor_answers: int | None = None,
        step_error_rate: float = 0.0,
    ) -> None:
        if branching < 1:
            raise ValueError("branching must be >= 1")
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if distractor_answers is not None and distractor_answers < 1:
            raise ValueError("distractor_answers must be >= 1 when set")
        if not 0.0 <= step_error_rate <= 1.0:
            raise ValueError("step_error_rate must lie in [0, 1]")
        self.seed = seed
        self.branching = branching
        self.depth = depth
        self.distractor_answers = distractor_answers
        self.step_error_rate = step_error_rate

    # ---------------------------------------------------------------- world

    def make_problems(self, count: int, id_prefix: str = "sp") -> list[Problem]:
        problems = []
        for i in range(count):
            target = _stable_rng(self.seed, "target", i).randint(100, 999)
            problems.append(
                Problem(
                    id=f"{id_prefix}-{i:04d}",
                    statement=f"Determine the target value for scripted case {i}.",
                    ground_truth=str(target),
                )
            )
        return problems

    def correct_leaf(self, problem: Problem) -> tuple[int, ...]:
        rng = _stable_rng(self.seed, "path", problem.id)
        return tuple(rng.randrange(self.branching) for _ in range(self.depth))

    def on_correct_path(self, problem: Problem, address: tuple[int, ...]) -> bool:
        return self.correct_leaf(problem)[: len(address)] == address

    def branch_order(self, problem: Problem, address: tuple[int, ...]) -> list[int]:
        rng = _stable_rng(self.seed, "order", problem.id, address)
        order = list(range(self.branching))
        rng.shuffle(order)
        return order

    def answer_for(self, problem: Problem, leaf_address: tuple[int, ...]) -> str:
        if len(leaf_address) != self.depth:
            raise ValueError("leaf address must have length == depth")
        target = int(problem.ground_truth or 0)
        if leaf_address == self.correct_leaf(problem):
            return str(target)
        if self.distractor_answers is None:
            leaf_index = 0
            for branch in leaf_address:
                leaf_index = leaf_index * self.branching + branch
            return str(target + 1 + leaf_index)
        rng = _stable_rng(self.seed, "distractor", problem.id, leaf_address)
        return str(target + 1 + rng.randrange(self.distractor_answers))

    def rephrasing(self, problem: Problem) -> str:
        return f"We need to find the single target value asked for in case {problem.id}."

    def step_for(self, problem: Problem, address: tuple[int, ...]) -> Step:
        """The scripted step reached by taking ``address`` from the root."""
        if not 1 <= len(address) <= self.depth:
            raise ValueError("address depth out of range")
        branch = address[-1]
        depth = len(address)
        rng = _stable_rng(self.seed, "step", problem.id, address)
        a, b = rng.randint(2, 12), rng.randint(2, 12)
        product = a * b
        wrong_step = (
            self.step_error_rate > 0.0
            and not self.on_correct_path(problem, address)
            and rng.random() < self.step_error_rate
        )
        if wrong_step:
            product += rng.randint(1, 5)
        calc = f"Along the way we compute {a} * {b} = {product}."
        if depth == self.depth:
            answer = self.answer_for(problem, address)
            title = f"Conclude via branch {branch + 1}"
            body = f"{calc} Collecting the results gives \\boxed{{{answer}}}."
        else:
            title = f"Explore branch {branch + 1}"
            body = f"{calc} We continue from route {'.'.join(str(x + 1) for x in address)}."
        return Step(index=depth, title=title, body=body)

    def address_of(self, steps: tuple[Step, ...]) -> tuple[int, ...]:
        """Recover the branch address encoded in scripted step titles."""
        address = []
        for step in steps:
            m = _BRANCH_RE.search(step.title)
            if m is None:
                raise ValueError(f"step title {step.title!r} is not scripted")
            address.append(int(m.group(1)) - 1)
        return tuple(address)

    def complete_solution(self, problem: Problem, steps: tuple[Step, ...]) -> CandidateSolution:
        """Assemble a full solution (with final-answer block) from leaf steps."""
        answer = extract_boxed(steps[-1].body) if steps else None
        if answer is None:
            raise ValueError("complete_solution requires a terminal step sequence")
        solution = CandidateSolution(
            problem_id=problem.id,
            raw_text="",
            rephrasing=self.rephrasing(problem),
            steps=steps,
            final_answer=answer,
        )
        return CandidateSolution(
            problem_id=solution.problem_id,
            raw_text=format_solution(solution),
            rephrasing=solution.rephrasing,
            steps=solution.steps,
            final_answer=solution.final_answer,
        )

    def enumerate_leaves(self, problem: Problem) -> list[tuple[tuple[int, ...], str]]:
        """All (leaf address, answer) pairs; brute-force oracle for tests."""
        leaves = []
        stack: list[tuple[int, ...]] = [()]
        while stack:
            addr = stack.pop()
            if len(addr) == self.depth:
                leaves.append((addr, self.answer_for(problem, addr)))
                continue
            for j in reversed(range(self.branching)):
                stack.append(addr + (j,))
        return leaves

    # ------------------------------------------------------------- backends

    def policy(self, run_seed: int = 0) -> "ScriptedPolicy":
        return ScriptedPolicy(self, run_seed)

    def oracle_reward(self) -> "ScriptedReward":
        return ScriptedReward(self, run_seed=0, noise_sigma=0.0)

    def noisy_reward(self, run_seed: int, noise_sigma: float = 0.3) -> "ScriptedReward":
        return ScriptedReward(self, run_seed=run_seed, noise_sigma=noise_sigma)


class ScriptedPolicy(PolicyBackend):
    """Policy backend navigating a scripted world.

    Step proposals are pure functions of the world; rollout sampling mixes
    in ``run_seed`` and a per-instance call counter, so repeated rollouts
    from one node differ while identical call sequences replay exactly.
    """

    capabilities = PolicyCapabilities(supports_step_generation=True, supports_rollout=True, max_batch=64)

    def __init__(self, world: ScriptedWorld, run_seed: int = 0) -> None:
        self.world = world
        self.run_seed = run_seed
        self._rollout_calls = 0

    def generate_steps(self, prefix: SolutionPrefix, k: int) -> list[Step]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if prefix.is_terminal():
            raise ValueError("cannot extend a terminal prefix")
        world = self.world
        address = world.address_of(prefix.steps)
        order = world.branch_order(prefix.problem, address)
        candidates = [world.step_for(prefix.problem, address + (j,)) for j in order]
        return [candidates[i % len(candidates)] for i in range(k)]

    def rollout(self, prefix: SolutionPrefix) -> CandidateSolution:
        world = self.world
        self._rollout_calls += 1
        address = world.address_of(prefix.steps)
        rng = _stable_rng(world.seed, "rollout", self.run_seed, prefix.problem.id, address, self._rollout_calls)
        steps = list(prefix.steps)
        generated = 0
        while len(address) < world.depth:
            if generated >= MAX_ROLLOUT_STEPS:
                raise NonTerminating(f"rollout exceeded {MAX_ROLLOUT_STEPS} steps")
            branch = rng.randrange(world.branching)
            address = address + (branch,)
            steps.append(world.step_for(prefix.problem, address))
            generated += 1
        return world.complete_solution(prefix.problem, tuple(steps))


class ScriptedReward(RewardBackend):
    """Reward backend with oracle or seeded-noise scoring.

    Complete solutions are judged by final-answer match against the
    problem's ground truth; partial solutions (no final answer) are judged
    by whether their step address stays on the designated correct path.
    With ``noise_sigma == 0`` the scores are exact oracle probabilities;
    otherwise p_yes is a clipped Gaussian around 0.8 (correct) or 0.2
    (incorrect), deterministic per solution text.
    """

    def __init__(self, world: ScriptedWorld, run_seed: int = 0, noise_sigma: float = 0.0) -> None:
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        self.world = world
        self.run_seed = run_seed
        self.noise_sigma = noise_sigma

    def _is_correct(self, problem: Problem, solution: CandidateSolution) -> bool:
        if problem.ground_truth is None:
            raise ValueError(f"problem {problem.id} has no ground truth to judge against")
        if solution.final_answer is not None:
            return answers_match(solution.final_answer, problem.ground_truth)
        address = self.world.address_of(solution.steps)
        return self.world.on_correct_path(problem, address)

    def assess(self, problem: Problem, solution: CandidateSolution) -> tuple[float, float]:
        correct = self._is_correct(problem, solution)
        if self.noise_sigma == 0.0:
            p_yes = 1.0 if correct else 0.0
            return p_yes, 1.0 - p_yes
        text_key = hashlib.blake2b(solution.raw_text.encode("utf-8"), digest_size=8).hexdigest()
        rng = _stable_rng(self.world.seed, "reward", self.run_seed, problem.id, text_key)
        base = 0.8 if correct else 0.2
        p_yes = min(1.0, max(0.0, rng.gauss(base, self.noise_sigma)))
        return p_yes, 1.0 - p_yes
