"""The reward-guided tree-search engine.

One search step is select -> expand -> simulate -> backpropagate:

* selection either walks the tree from the root by UCB value (MCTS) or
  thresholds all non-terminal leaves globally (MCTS_G);
* expansion asks the policy for k candidate next steps, collapsing
  byte-identical duplicates;
* simulation estimates a fresh child's value as the mean over n rollouts of
  the blended score (1 - alpha) * reward + alpha * self_consistency, where
  the self-consistency term is the fraction of all rollout history so far
  (current batch included) sharing the rollout's canonical answer;
* backpropagation folds the freshly simulated child values into every node
  from the expanded parent up to the root:
  V <- (N * V + sum(values)) / (N + k), N <- N + k.

Pre-expansion fully expands the first few layers before the budgeted loop.
With tool verification on, a child whose step fails calculator verification
has its simulated value multiplied by the tool penalty before it is
backpropagated, and trajectories through such steps are penalized the same
way at answer-selection time.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Any

from ..backends.base import PolicyBackend, RewardBackend, SolutionPrefix
from ..core.answers import canonical_answer
from ..core.types import (
    Algorithm,
    AnswerSource,
    CandidateSolution,
    EventKind,
    LeafStats,
    Problem,
    SearchConfig,
    SearchTree,
    Step,
    TreeNode,
)
from ..textops.solution import format_steps, has_final_answer
from ..textops.verify import step_has_mismatch
from .trace import TraceRecorder


class SearchError(RuntimeError):
    pass


class NoChildren(SearchError):
    """ucb_select was asked to choose among zero children."""


class NoLeaves(SearchError):
    """Global leaf selection found no non-terminal leaf."""


class DepthExceeded(SearchError):
    """Expansion was requested at or beyond the depth limit."""


@dataclass
class SearchOutcome:
    """Result of one search run."""

    tree: SearchTree
    answer: str | None
    answer_source: AnswerSource
    steps_used: int
    wall_time: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "tree": self.tree.to_dict(),
            "answer": self.answer,
            "answer_source": self.answer_source.value,
            "steps_used": self.steps_used,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SearchOutcome":
        return cls(
            tree=SearchTree.from_dict(d["tree"]),
            answer=d.get("answer"),
            answer_source=AnswerSource(d["answer_source"]),
            steps_used=d["steps_used"],
            wall_time=d["wall_time"],
        )


def ucb_select(tree: SearchTree, node: TreeNode, exploration_c: float) -> TreeNode:
    """The child maximizing V(child) + c * sqrt(ln N(node) / (1 + N(child))).

    Ties break toward the smallest node_id. With c = 0 this reduces to
    argmax V. A zero-visit parent contributes no exploration term.
    """
    children = tree.children_of(node.node_id)
    if not children:
        raise NoChildren(f"node {node.node_id} has no children")
    log_visits = math.log(node.visits) if node.visits > 0 else 0.0
    best = None
    best_ucb = -math.inf
    for child in children:
        ucb = child.value + exploration_c * math.sqrt(log_visits / (1 + child.visits))
        if ucb > best_ucb:
            best, best_ucb = child, ucb
    assert best is not None
    return best


def descend_to_leaf(tree: SearchTree, exploration_c: float) -> TreeNode:
    """Repeat UCB selection from the root until a leaf is reached."""
    node = tree.root
    while node.children:
        node = ucb_select(tree, node, exploration_c)
    return node


def global_leaf_select(tree: SearchTree, lambda_: float) -> tuple[list[TreeNode], LeafStats]:
    """All non-terminal leaves whose value exceeds mean + lambda * stddev.

    The standard deviation is the population deviation over leaf values.
    When no leaf clears the threshold, the single max-value leaf (smallest
    node_id on ties) is returned as a fallback.
    """
    leaves = tree.non_terminal_leaves()
    if not leaves:
        raise NoLeaves("tree has no non-terminal leaves")
    values = [leaf.value for leaf in leaves]
    mean = math.fsum(values) / len(values)
    stddev = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    threshold = mean + lambda_ * stddev
    stats = LeafStats(mean=mean, stddev=stddev, threshold=threshold, leaf_count=len(leaves))
    selected = [leaf for leaf in leaves if leaf.value > threshold]
    if not selected:
        best = leaves[0]
        for leaf in leaves[1:]:
            if leaf.value > best.value:
                best = leaf
        selected = [best]
    return selected, stats


def node_prefix(tree: SearchTree, node: TreeNode, problem: Problem) -> SolutionPrefix:
    return SolutionPrefix(problem=problem, steps=tree.prefix_steps(node.node_id))


def expand(
    tree: SearchTree,
    node: TreeNode,
    policy: PolicyBackend,
    problem: Problem,
    k: int,
    max_depth: int,
) -> list[TreeNode]:
    """Append up to k children to a non-terminal leaf.

    Candidates with byte-identical step text collapse to one node. A child
    is terminal when the final-answer extractor succeeds on its accumulated
    prefix text. Fresh children start at value 0 and zero visits.
    """
    if node.terminal:
        raise SearchError(f"node {node.node_id} is terminal and cannot expand")
    if node.children:
        raise SearchError(f"node {node.node_id} is not a leaf")
    if node.depth >= max_depth:
        raise DepthExceeded(f"node {node.node_id} is at depth limit {max_depth}")

    prefix = node_prefix(tree, node, problem)
    candidates = policy.generate_steps(prefix, k)
    children: list[TreeNode] = []
    seen: set[tuple[str, str]] = set()
    for step in candidates:
        if step.index != node.depth + 1:
            step = Step(index=node.depth + 1, title=step.title, body=step.body)
        key = (step.title, step.body)
        if key in seen:
            continue
        seen.add(key)
        terminal = has_final_answer(format_steps("", prefix.steps + (step,)))
        children.append(tree.add_child(node.node_id, step, terminal))
    return children


def simulate(
    tree: SearchTree,
    node: TreeNode,
    policy: PolicyBackend,
    reward: RewardBackend,
    problem: Problem,
    n: int,
    alpha: float,
    trace: TraceRecorder | None = None,
) -> float:
    """Estimate a node's value from rollouts blended with self-consistency.

    Non-terminal nodes get n rollouts; a terminal node scores its own
    trajectory once with no extension. Every rollout joins the tree's
    history (scored, so later answer selection can reuse the reward), and
    the self-consistency fraction is computed against the full history
    including the batch just appended. A node that has never been visited
    keeps the returned value as its initial V.
    """
    prefix = node_prefix(tree, node, problem)
    count = 1 if node.terminal else n
    sampled: list[tuple[CandidateSolution, str | None]] = []
    for _ in range(count):
        solution = policy.rollout(prefix)
        score = reward.score(problem, solution)
        solution = solution.with_score(score.normalized_yes)
        answer_key = canonical_answer(solution.final_answer)
        tree.append_rollout(solution, answer_key)
        sampled.append((solution, answer_key))

    blended = [
        (1.0 - alpha) * sol.rm_score + alpha * tree.answer_fraction(answer_key)
        for sol, answer_key in sampled
    ]
    value = math.fsum(blended) / len(blended)
    if node.visits == 0:
        node.value = value
    if trace is not None:
        trace.emit(EventKind.SIMULATED, node_id=node.node_id, value=value, rollouts=count)
    return value


def backpropagate(
    tree: SearchTree,
    node: TreeNode,
    child_values: list[float],
    trace: TraceRecorder | None = None,
) -> None:
    """Fold freshly simulated values into ``node`` and every ancestor.

    Each node along the path to the root updates
    V <- (N * V + sum(values)) / (N + k) and N <- N + k.
    """
    if not child_values:
        return
    total = math.fsum(child_values)
    k = len(child_values)
    current: TreeNode | None = node
    while current is not None:
        current.value = (current.visits * current.value + total) / (current.visits + k)
        current.visits += k
        current = tree.nodes[current.parent_id] if current.parent_id is not None else None
    if trace is not None:
        trace.emit(EventKind.BACKPROPAGATED, node_id=node.node_id, values_sum=total, count=k)


@dataclass
class _Run:
    """Shared state of one search run."""

    problem: Problem
    config: SearchConfig
    policy: PolicyBackend
    reward: RewardBackend
    tree: SearchTree
    trace: TraceRecorder
    steps_used: int = 0
    started: float = 0.0

    def out_of_time(self) -> bool:
        limit = self.config.time_limit_s
        return limit is not None and time.monotonic() - self.started > limit


def _tool_gate(run: _Run, child: TreeNode, value: float) -> float:
    """Apply the calculator-verification penalty to a simulated value."""
    if not run.config.tool_verification or child.step is None:
        return value
    if step_has_mismatch(child.step):
        value *= run.config.tool_penalty
        child.value = value
        run.trace.emit(
            EventKind.TOOL_VERIFIED, node_id=child.node_id, mismatch=True, penalized_value=value
        )
    return value


def _expand_and_simulate(run: _Run, node: TreeNode) -> None:
    """One expansion cycle: expand ``node``, simulate and backprop children."""
    cfg = run.config
    children = expand(run.tree, node, run.policy, run.problem, cfg.children_per_expansion, cfg.max_depth)
    run.trace.emit(EventKind.EXPANDED, node_id=node.node_id, children=[c.node_id for c in children])
    values = []
    for child in children:
        value = simulate(
            run.tree, child, run.policy, run.reward, run.problem,
            cfg.rollouts_per_simulation, cfg.sc_alpha, run.trace,
        )
        value = _tool_gate(run, child, value)
        values.append(value)
    backpropagate(run.tree, node, values, run.trace)


def _revisit(run: _Run, node: TreeNode) -> None:
    """Re-score a terminal or depth-capped leaf and backpropagate from it."""
    cfg = run.config
    value = simulate(
        run.tree, node, run.policy, run.reward, run.problem,
        cfg.rollouts_per_simulation, cfg.sc_alpha, run.trace,
    )
    value = _tool_gate(run, node, value)
    backpropagate(run.tree, node, [value], run.trace)


def pre_expand(run: _Run) -> None:
    """Fully expand the first ``pre_expansion_layers`` layers breadth-first.

    Every expansion is followed by simulation and backpropagation exactly as
    in the main loop; zero layers is a no-op. Pre-expansion runs before the
    step budget starts counting.
    """
    for layer in range(run.config.pre_expansion_layers):
        frontier = [
            node
            for node in run.tree.iter_nodes()
            if node.depth == layer and not node.terminal and not node.children
        ]
        for node in frontier:
            if node.depth >= run.config.max_depth:
                continue
            run.trace.emit(EventKind.PRE_EXPANDED, node_id=node.node_id, layer=layer)
            _expand_and_simulate(run, node)


def _trajectory_has_mismatch(solution: CandidateSolution) -> bool:
    return any(step_has_mismatch(step) for step in solution.steps)


def _final_blended_score(run: _Run, solution: CandidateSolution, answer_key: str | None) -> float:
    alpha = run.config.sc_alpha
    reward_part = solution.rm_score if solution.rm_score is not None else 0.0
    score = (1.0 - alpha) * reward_part + alpha * run.tree.answer_fraction(answer_key)
    if run.config.tool_verification and _trajectory_has_mismatch(solution):
        score *= run.config.tool_penalty
    return score


def _choose_answer(run: _Run) -> str | None:
    """Pick the final answer from the completed run.

    BEST_TERMINAL takes the trajectory (terminal nodes and rollouts all live
    in the history) with the highest final blended score, recomputing the
    self-consistency term against the complete history; ties keep the
    earliest trajectory. MAJORITY_ROLLOUT takes the plurality canonical
    answer, ties toward the smallest answer string.
    """
    history = run.tree.rollout_history
    if not history:
        return None
    if run.config.answer_source == AnswerSource.MAJORITY_ROLLOUT:
        counts = run.tree.answer_counts()
        if not counts:
            return None
        top = max(counts.values())
        return min(answer for answer, count in counts.items() if count == top)

    best_answer: str | None = None
    best_score = -math.inf
    for solution in history:
        answer_key = canonical_answer(solution.final_answer)
        score = _final_blended_score(run, solution, answer_key)
        if score > best_score:
            best_score = score
            best_answer = solution.final_answer
    return best_answer


def run_search(
    problem: Problem,
    config: SearchConfig,
    policy: PolicyBackend,
    reward: RewardBackend,
    trace_path: str | None = None,
) -> SearchOutcome:
    """Run one full search for ``problem`` and return its outcome.

    Executes pre-expansion, then selection-expansion cycles until the step
    budget (or optional wall-clock limit) is exhausted or no expandable
    leaf remains. Budget exhaustion is a normal outcome, not an error.
    """
    if config.algorithm == Algorithm.BEAM:
        from .beam import beam_search

        return beam_search(problem, config, policy, reward, trace_path)

    started = time.monotonic()
    tree = SearchTree(problem.id)
    with TraceRecorder(tree_id=problem.id, path=trace_path) as trace:
        run = _Run(
            problem=problem, config=config, policy=policy, reward=reward,
            tree=tree, trace=trace, started=started,
        )
        pre_expand(run)

        while run.steps_used < config.step_budget and not run.out_of_time():
            if config.algorithm == Algorithm.MCTS:
                leaf = descend_to_leaf(tree, config.exploration_c)
                trace.emit(EventKind.SELECTED, node_id=leaf.node_id, depth=leaf.depth)
                if leaf.terminal or leaf.depth >= config.max_depth:
                    _revisit(run, leaf)
                else:
                    _expand_and_simulate(run, leaf)
                run.steps_used += 1
            else:  # MCTS_G
                try:
                    selected, stats = global_leaf_select(tree, config.lambda_)
                except NoLeaves:
                    break
                trace.emit(
                    EventKind.SELECTED,
                    node_ids=[leaf.node_id for leaf in selected],
                    mean=stats.mean,
                    stddev=stats.stddev,
                    threshold=stats.threshold,
                    leaf_count=stats.leaf_count,
                )
                for leaf in selected:
                    if run.steps_used >= config.step_budget or run.out_of_time():
                        break
                    if leaf.depth >= config.max_depth:
                        _revisit(run, leaf)
                    else:
                        _expand_and_simulate(run, leaf)
                    run.steps_used += 1

        answer = _choose_answer(run)
        trace.emit(EventKind.FINISHED, answer=answer, steps_used=run.steps_used)

    return SearchOutcome(
        tree=tree,
        answer=answer,
        answer_source=config.answer_source,
        steps_used=run.steps_used,
        wall_time=time.monotonic() - started,
    )
