"""Step-level beam search over the same tree and scoring machinery.

Each iteration every live beam proposes k candidate steps; candidates are
scored either by rollout simulation (the default, sharing the blended
reward/self-consistency estimate with the tree-search algorithms) or by
direct reward-model scoring of the partial trajectory. The top ``beam_width``
candidates survive. Terminal candidates keep their slot and score; the run
ends when every surviving beam is terminal, the depth limit is reached, or
the step budget runs out. There is no backtracking and no backpropagation.
"""

from __future__ import annotations

import time

from ..backends.base import PolicyBackend, RewardBackend
from ..core.answers import canonical_answer
from ..core.types import (
    Algorithm,
    CandidateSolution,
    EventKind,
    Problem,
    SearchConfig,
    SearchTree,
    TreeNode,
)
from ..textops.solution import extract_boxed
from .engine import SearchOutcome, _choose_answer, _Run, expand, node_prefix, simulate, _tool_gate
from .trace import TraceRecorder


def _direct_score(run: _Run, node: TreeNode) -> float:
    """Score a trajectory with the reward model alone (no rollouts, no
    self-consistency blending).

    Terminal candidates close into complete solutions, which join the
    rollout history so answer selection can still fall back to them;
    partial trajectories are scored as-is and recorded nowhere.
    """
    prefix = node_prefix(run.tree, node, run.problem)
    if node.terminal:
        solution = run.policy.rollout(prefix)
        value = run.reward.score(run.problem, solution).normalized_yes
        run.tree.append_rollout(solution.with_score(value), canonical_answer(solution.final_answer))
    else:
        partial = CandidateSolution(
            problem_id=run.problem.id,
            raw_text=prefix.text(),
            steps=prefix.steps,
            final_answer=None,
        )
        value = run.reward.score(run.problem, partial).normalized_yes
    node.value = value
    run.trace.emit(EventKind.SIMULATED, node_id=node.node_id, value=value, rollouts=0)
    return value


def _score_candidate(run: _Run, node: TreeNode) -> float:
    cfg = run.config
    if cfg.beam_direct_scoring:
        value = _direct_score(run, node)
    else:
        value = simulate(
            run.tree, node, run.policy, run.reward, run.problem,
            cfg.rollouts_per_simulation, cfg.sc_alpha, run.trace,
        )
    return _tool_gate(run, node, value)


def beam_search(
    problem: Problem,
    config: SearchConfig,
    policy: PolicyBackend,
    reward: RewardBackend,
    trace_path: str | None = None,
) -> SearchOutcome:
    """Run beam search for ``problem``; exploration_c and lambda are ignored."""
    if config.algorithm != Algorithm.BEAM:
        raise ValueError("beam_search requires config.algorithm == BEAM")

    started = time.monotonic()
    tree = SearchTree(problem.id)
    with TraceRecorder(tree_id=problem.id, path=trace_path) as trace:
        run = _Run(
            problem=problem, config=config, policy=policy, reward=reward,
            tree=tree, trace=trace, started=started,
        )
        beam: list[tuple[TreeNode, float]] = [(tree.root, 0.0)]

        while not run.out_of_time():
            live = [(node, score) for node, score in beam if node.terminal or node.depth < config.max_depth]
            if not live or all(node.terminal for node, _ in live):
                beam = live
                break
            if run.steps_used >= config.step_budget:
                beam = live
                break

            candidates: list[tuple[TreeNode, float]] = []
            for node, score in live:
                if node.terminal:
                    candidates.append((node, score))
                    continue
                if run.steps_used >= config.step_budget or run.out_of_time():
                    candidates.append((node, score))
                    continue
                children = expand(tree, node, policy, problem, config.children_per_expansion, config.max_depth)
                trace.emit(EventKind.EXPANDED, node_id=node.node_id, children=[c.node_id for c in children])
                run.steps_used += 1
                for child in children:
                    candidates.append((child, _score_candidate(run, child)))

            candidates.sort(key=lambda pair: (-pair[1], pair[0].node_id))
            beam = candidates[: config.beam_width]
            trace.emit(
                EventKind.SELECTED,
                node_ids=[node.node_id for node, _ in beam],
                scores=[score for _, score in beam],
            )

        answer = _beam_answer(run, beam)
        trace.emit(EventKind.FINISHED, answer=answer, steps_used=run.steps_used)

    return SearchOutcome(
        tree=tree,
        answer=answer,
        answer_source=config.answer_source,
        steps_used=run.steps_used,
        wall_time=time.monotonic() - started,
    )


def _beam_answer(run: _Run, beam: list[tuple[TreeNode, float]]) -> str | None:
    """The best-scored terminal beam's answer, else the best rollout so far."""
    terminal = [(node, score) for node, score in beam if node.terminal]
    if terminal:
        best_node, _ = max(terminal, key=lambda pair: (pair[1], -pair[0].node_id))
        prefix = node_prefix(run.tree, best_node, run.problem)
        return extract_boxed(prefix.text())
    return _choose_answer(run)
