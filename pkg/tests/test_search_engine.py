"""End-to-end behavior of run_search and beam_search on scripted worlds."""

from __future__ import annotations

import pytest

from rgsearch.backends.scripted import ScriptedWorld
from rgsearch.core.types import Algorithm, AnswerSource, SearchConfig
from rgsearch.core.validate import validate_tree
from rgsearch.search.engine import run_search


def mcts_config(**kwargs) -> SearchConfig:
    defaults = dict(
        algorithm=Algorithm.MCTS,
        step_budget=20,
        max_depth=6,
        children_per_expansion=3,
        rollouts_per_simulation=3,
        pre_expansion_layers=1,
    )
    defaults.update(kwargs)
    return SearchConfig(**defaults)


class TestRunSearch:
    def test_zero_budget_zero_layers_has_no_answer(self, small_world, problem):
        config = mcts_config(
            step_budget=0, pre_expansion_layers=0, answer_source=AnswerSource.MAJORITY_ROLLOUT
        )
        outcome = run_search(problem, config, small_world.policy(0), small_world.oracle_reward())
        assert outcome.answer is None
        assert outcome.steps_used == 0
        assert outcome.tree.rollout_history == []

    def test_budget_respected_and_tree_valid(self, small_world, problem):
        config = mcts_config(step_budget=7)
        outcome = run_search(problem, config, small_world.policy(3), small_world.oracle_reward())
        assert outcome.steps_used <= 7
        assert validate_tree(outcome.tree) == []

    def test_finds_unique_correct_path(self, small_world, problem):
        config = mcts_config(step_budget=30, pre_expansion_layers=2, rollouts_per_simulation=5)
        hits = 0
        for seed in range(20):
            outcome = run_search(problem, config, small_world.policy(seed), small_world.oracle_reward())
            hits += outcome.answer == problem.ground_truth
        assert hits >= 18

    def test_trace_streams_are_replay_identical(self, small_world, problem, tmp_path):
        config = mcts_config(rng_seed=9)
        paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
        outcomes = [
            run_search(problem, config, small_world.policy(9), small_world.oracle_reward(), trace_path=str(p))
            for p in paths
        ]
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert outcomes[0].tree == outcomes[1].tree
        assert outcomes[0].answer == outcomes[1].answer

    def test_trace_is_causally_ordered(self, small_world, problem, tmp_path):
        import json

        trace_path = tmp_path / "t.jsonl"
        outcome = run_search(
            problem, mcts_config(), small_world.policy(1), small_world.oracle_reward(),
            trace_path=str(trace_path),
        )
        events = [json.loads(line) for line in trace_path.read_text().splitlines()]
        stamps = [e["timestamp"] for e in events]
        assert stamps == sorted(stamps) and len(set(stamps)) == len(stamps)
        assert events[-1]["event"] == "finished"

        # Every backpropagation from node X is fed by exactly its batch of
        # simulated values, each on X itself or one of X's children.
        tree = outcome.tree
        pending: list[int] = []
        for event in events:
            if event["event"] == "simulated":
                pending.append(event["payload"]["node_id"])
            elif event["event"] == "backpropagated":
                target = event["payload"]["node_id"]
                count = event["payload"]["count"]
                assert len(pending) == count, "backpropagated without its simulations"
                for node_id in pending:
                    node = tree.nodes[node_id]
                    assert node_id == target or node.parent_id == target
                pending = []
        assert pending == []

    def test_majority_rollout_answer_matches_plain_majority(self, small_world, problem):
        config = mcts_config(
            sc_alpha=1.0, answer_source=AnswerSource.MAJORITY_ROLLOUT, step_budget=10
        )
        outcome = run_search(problem, config, small_world.policy(2), small_world.oracle_reward())
        counts = outcome.tree.answer_counts()
        top = max(counts.values())
        expected = min(a for a, c in counts.items() if c == top)
        assert outcome.answer == expected

    def test_time_limit_stops_main_loop(self, small_world, problem):
        config = mcts_config(pre_expansion_layers=0, time_limit_s=1e-9)
        outcome = run_search(problem, config, small_world.policy(0), small_world.oracle_reward())
        assert outcome.steps_used == 0

    def test_depth_cap_below_world_depth_still_completes(self, small_world, problem):
        config = mcts_config(max_depth=2, step_budget=8)
        outcome = run_search(problem, config, small_world.policy(4), small_world.oracle_reward())
        assert outcome.steps_used == 8
        assert validate_tree(outcome.tree) == []
        assert all(n.depth <= 2 for n in outcome.tree.nodes.values())
        assert outcome.answer is not None  # rollouts still complete solutions

    def test_search_outcome_round_trip(self, small_world, problem):
        import json

        from rgsearch.search.engine import SearchOutcome

        outcome = run_search(problem, mcts_config(step_budget=3), small_world.policy(0), small_world.oracle_reward())
        restored = SearchOutcome.from_dict(json.loads(json.dumps(outcome.to_dict())))
        assert restored.answer == outcome.answer
        assert restored.tree == outcome.tree


class TestMctsG:
    def test_runs_and_counts_budget_per_expanded_leaf(self, small_world, problem):
        config = mcts_config(algorithm=Algorithm.MCTS_G, step_budget=9, lambda_=-1e6)
        outcome = run_search(problem, config, small_world.policy(5), small_world.oracle_reward())
        # lambda = -inf surrogate selects every leaf each round, so the budget
        # is consumed in full even on the first selection rounds.
        assert outcome.steps_used == 9
        assert validate_tree(outcome.tree) == []

    def test_selected_events_carry_leaf_stats(self, small_world, problem, tmp_path):
        import json

        trace_path = tmp_path / "g.jsonl"
        config = mcts_config(algorithm=Algorithm.MCTS_G, step_budget=4)
        run_search(problem, config, small_world.policy(5), small_world.oracle_reward(), trace_path=str(trace_path))
        selected = [
            json.loads(line)
            for line in trace_path.read_text().splitlines()
            if json.loads(line)["event"] == "selected"
        ]
        assert selected
        for event in selected:
            payload = event["payload"]
            assert {"node_ids", "mean", "stddev", "threshold", "leaf_count"} <= payload.keys()

    def test_exhausts_when_all_leaves_terminal(self):
        world = ScriptedWorld(seed=5, branching=1, depth=1)
        problem = world.make_problems(1)[0]
        config = mcts_config(
            algorithm=Algorithm.MCTS_G, step_budget=50, pre_expansion_layers=0,
            children_per_expansion=1, rollouts_per_simulation=1,
        )
        outcome = run_search(problem, config, world.policy(0), world.oracle_reward())
        # one expansion produces the single terminal child; the next selection
        # finds no non-terminal leaf and the search stops early
        assert outcome.steps_used == 1
        assert outcome.answer == problem.ground_truth


class TestToolVerification:
    def test_mismatching_subtree_never_wins_with_zero_penalty(self):
        """With penalty 0, a trajectory through a wrong-arithmetic step cannot
        beat a clean terminal at answer selection."""
        world = ScriptedWorld(seed=13, branching=3, depth=3, step_error_rate=1.0)
        problem = world.make_problems(1)[0]
        config = mcts_config(
            step_budget=25, rollouts_per_simulation=5, pre_expansion_layers=2,
            tool_verification=True, tool_penalty=0.0,
        )
        outcome = run_search(problem, config, world.policy(1), world.oracle_reward())
        history = outcome.tree.rollout_history
        assert any(s.final_answer == problem.ground_truth for s in history)
        assert outcome.answer == problem.ground_truth

    def test_tool_events_emitted(self, tmp_path):
        import json

        world = ScriptedWorld(seed=13, branching=3, depth=3, step_error_rate=1.0)
        problem = world.make_problems(1)[0]
        config = mcts_config(step_budget=6, tool_verification=True, tool_penalty=0.5)
        trace_path = tmp_path / "tool.jsonl"
        run_search(problem, config, world.policy(1), world.oracle_reward(), trace_path=str(trace_path))
        kinds = [json.loads(line)["event"] for line in trace_path.read_text().splitlines()]
        assert "tool_verified" in kinds

    def test_soft_penalty_halves_value(self):
        from rgsearch.core.types import Problem, SearchTree, Step
        from rgsearch.search.engine import _Run, _tool_gate
        from rgsearch.search.trace import TraceRecorder

        problem = Problem("t", "q", "1")
        tree = SearchTree("t")
        child = tree.add_child(0, Step(1, "bad", "2+2 = 5"), False)
        run = _Run(
            problem=problem,
            config=mcts_config(tool_verification=True, tool_penalty=0.5),
            policy=None, reward=None, tree=tree, trace=TraceRecorder("t"),
        )
        assert _tool_gate(run, child, 0.6) == pytest.approx(0.3)
        clean = tree.add_child(0, Step(1, "good", "2+2 = 4"), False)
        assert _tool_gate(run, clean, 0.6) == pytest.approx(0.6)


class TestBeamSearch:
    def test_width_one_greedy_decoding(self, small_world, problem):
        config = SearchConfig(
            algorithm=Algorithm.BEAM, beam_width=1, children_per_expansion=1,
            rollouts_per_simulation=1, step_budget=20, max_depth=6,
        )
        outcome = run_search(problem, config, small_world.policy(0), small_world.oracle_reward())
        assert outcome.answer is not None
        assert outcome.steps_used <= 20

    def test_wide_beam_equals_exhaustive_enumeration(self, tiny_world):
        """Beam width >= all leaf paths reduces to exhaustive search."""
        problem = tiny_world.make_problems(1)[0]
        config = SearchConfig(
            algorithm=Algorithm.BEAM, beam_width=4, children_per_expansion=2,
            rollouts_per_simulation=1, step_budget=50, max_depth=4,
        )
        outcome = run_search(problem, config, tiny_world.policy(0), tiny_world.oracle_reward())
        leaves = tiny_world.enumerate_leaves(problem)
        assert len(leaves) == 4
        best_answer = problem.ground_truth  # oracle reward makes the correct leaf the best-scored
        assert outcome.answer == best_answer

    def test_beam_set_size_invariant(self, small_world, problem, tmp_path):
        import json

        config = SearchConfig(
            algorithm=Algorithm.BEAM, beam_width=3, children_per_expansion=3,
            rollouts_per_simulation=1, step_budget=100, max_depth=6,
        )
        trace_path = tmp_path / "beam.jsonl"
        run_search(problem, config, small_world.policy(2), small_world.oracle_reward(), trace_path=str(trace_path))
        sizes = [
            len(json.loads(line)["payload"]["node_ids"])
            for line in trace_path.read_text().splitlines()
            if json.loads(line)["event"] == "selected"
        ]
        assert sizes and all(size == 3 for size in sizes)

    def test_direct_scoring_mode(self, small_world, problem):
        config = SearchConfig(
            algorithm=Algorithm.BEAM, beam_width=2, children_per_expansion=3,
            rollouts_per_simulation=1, step_budget=50, max_depth=6, beam_direct_scoring=True,
        )
        outcome = run_search(problem, config, small_world.policy(0), small_world.oracle_reward())
        # the oracle prefix scores steer the beam straight down the correct path
        assert outcome.answer == problem.ground_truth

    def test_ignores_exploration_and_lambda(self, small_world, problem):
        base = dict(
            algorithm=Algorithm.BEAM, beam_width=2, children_per_expansion=2,
            rollouts_per_simulation=1, step_budget=30, max_depth=6,
        )
        a = run_search(problem, SearchConfig(exploration_c=0.0, lambda_=0.0, **base),
                       small_world.policy(7), small_world.oracle_reward())
        b = run_search(problem, SearchConfig(exploration_c=5.0, lambda_=3.0, **base),
                       small_world.policy(7), small_world.oracle_reward())
        assert a.answer == b.answer
        assert a.tree == b.tree
