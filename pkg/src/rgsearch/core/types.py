"""Domain types shared by the search engine, backends, and data pipelines.

Everything here is a plain value object with a stable JSON form (``to_dict``
/ ``from_dict``, lowercase snake_case keys, one object per line in trace
files). All types are immutable except :class:`TreeNode` and
:class:`SearchTree`, which are mutated only by the search module and are
confined to one search task at a time.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator


class Label(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    UNLABELED = "unlabeled"


class Algorithm(str, Enum):
    MCTS = "mcts"
    MCTS_G = "mcts_g"
    BEAM = "beam"


class AnswerSource(str, Enum):
    BEST_TERMINAL = "best_terminal"
    MAJORITY_ROLLOUT = "majority_rollout"


class DatasetKind(str, Enum):
    ORIGINAL = "original"
    CLEANED = "cleaned"
    ACTIVE_LEARNING = "active_learning"


class EventKind(str, Enum):
    SELECTED = "selected"
    EXPANDED = "expanded"
    SIMULATED = "simulated"
    BACKPROPAGATED = "backpropagated"
    PRE_EXPANDED = "pre_expanded"
    TOOL_VERIFIED = "tool_verified"
    FINISHED = "finished"


@dataclass(frozen=True)
class Problem:
    """A question with an optional canonical answer.

    ``ground_truth`` may be absent for unlabeled inference-time problems.
    """

    id: str
    statement: str
    ground_truth: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("problem id must be nonempty")
        if not self.statement:
            raise ValueError("problem statement must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "statement": self.statement, "ground_truth": self.ground_truth}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Problem:
        return cls(id=d["id"], statement=d["statement"], ground_truth=d.get("ground_truth"))


@dataclass(frozen=True)
class Step:
    """One reasoning step: a 1-based index, a short title, and a body."""

    index: int
    title: str
    body: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("step index must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {"index": self.index, "title": self.title, "body": self.body}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Step:
        return cls(index=d["index"], title=d["title"], body=d["body"])


@dataclass(frozen=True)
class CandidateSolution:
    """A generated solution for one problem, possibly labeled and scored."""

    problem_id: str
    raw_text: str
    rephrasing: str = ""
    steps: tuple[Step, ...] = ()
    final_answer: str | None = None
    label: Label = Label.UNLABELED
    rm_score: float | None = None

    def with_label(self, label: Label) -> CandidateSolution:
        return dataclasses.replace(self, label=label)

    def with_score(self, rm_score: float) -> CandidateSolution:
        return dataclasses.replace(self, rm_score=rm_score)

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "raw_text": self.raw_text,
            "rephrasing": self.rephrasing,
            "steps": [s.to_dict() for s in self.steps],
            "final_answer": self.final_answer,
            "label": self.label.value,
            "rm_score": self.rm_score,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CandidateSolution:
        return cls(
            problem_id=d["problem_id"],
            raw_text=d["raw_text"],
            rephrasing=d.get("rephrasing", ""),
            steps=tuple(Step.from_dict(s) for s in d.get("steps", [])),
            final_answer=d.get("final_answer"),
            label=Label(d.get("label", "unlabeled")),
            rm_score=d.get("rm_score"),
        )


def check_solution(solution: CandidateSolution) -> list[str]:
    """Return invariant violations for a solution (empty list when valid)."""
    violations: list[str] = []
    if solution.label != Label.UNLABELED and solution.final_answer is None:
        violations.append("labeled solution is missing final_answer")
    if solution.rm_score is not None and not 0.0 <= solution.rm_score <= 1.0:
        violations.append(f"rm_score {solution.rm_score} outside [0, 1]")
    for prev, cur in zip(solution.steps, solution.steps[1:]):
        if cur.index != prev.index + 1:
            violations.append(f"step indices {prev.index} -> {cur.index} not consecutive")
    if solution.steps and solution.steps[0].index != 1:
        violations.append(f"first step index is {solution.steps[0].index}, expected 1")
    return violations


@dataclass
class TreeNode:
    """A node of the search tree carrying one step and its statistics.

    ``value`` and ``visits`` start at 0 and change only through simulation
    and backpropagation. The root carries no step (``step is None``).
    """

    node_id: int
    parent_id: int | None
    depth: int
    step: Step | None = None
    children: list[int] = field(default_factory=list)
    value: float = 0.0
    visits: int = 0
    terminal: bool = False

    @property
    def is_root(self) -> bool:
        return self.parent_id is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "node_id": self.node_id,
            "parent_id": self.parent_id,
            "depth": self.depth,
            "step": self.step.to_dict() if self.step is not None else None,
            "children": list(self.children),
            "value": self.value,
            "visits": self.visits,
            "terminal": self.terminal,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TreeNode:
        return cls(
            node_id=d["node_id"],
            parent_id=d["parent_id"],
            depth=d["depth"],
            step=Step.from_dict(d["step"]) if d.get("step") is not None else None,
            children=list(d.get("children", [])),
            value=d.get("value", 0.0),
            visits=d.get("visits", 0),
            terminal=d.get("terminal", False),
        )


class SearchTree:
    """Mutable search tree plus the append-only history of rollout samples.

    Node ids increase monotonically from 0 (the root); all tie-breaking in
    the engine resolves toward the smallest node_id so runs replay exactly.
    """

    def __init__(self, problem_id: str) -> None:
        self.problem_id = problem_id
        root = TreeNode(node_id=0, parent_id=None, depth=0)
        self.nodes: dict[int, TreeNode] = {0: root}
        self.root_id = 0
        self.rollout_history: list[CandidateSolution] = []
        self._next_id = 1
        # Parallel caches over rollout_history, maintained by append_rollout.
        self._history_answers: list[str | None] = []
        self._answer_counts: dict[str, int] = {}

    @property
    def root(self) -> TreeNode:
        return self.nodes[self.root_id]

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def add_child(self, parent_id: int, step: Step, terminal: bool) -> TreeNode:
        parent = self.nodes[parent_id]
        child = TreeNode(
            node_id=self._next_id,
            parent_id=parent_id,
            depth=parent.depth + 1,
            step=step,
            terminal=terminal,
        )
        self._next_id += 1
        self.nodes[child.node_id] = child
        parent.children.append(child.node_id)
        return child

    def children_of(self, node_id: int) -> list[TreeNode]:
        return [self.nodes[c] for c in self.nodes[node_id].children]

    def is_leaf(self, node_id: int) -> bool:
        return not self.nodes[node_id].children

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.iter_nodes() if not n.children]

    def non_terminal_leaves(self) -> list[TreeNode]:
        return [n for n in self.leaves() if not n.terminal]

    def iter_nodes(self) -> Iterator[TreeNode]:
        """Nodes in ascending node_id order (creation order)."""
        for nid in sorted(self.nodes):
            yield self.nodes[nid]

    def path_ids(self, node_id: int) -> list[int]:
        """Node ids from the root down to ``node_id`` inclusive."""
        path = []
        cur: int | None = node_id
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent_id
        path.reverse()
        return path

    def prefix_steps(self, node_id: int) -> tuple[Step, ...]:
        """The accumulated steps from the root down to ``node_id``."""
        steps = []
        for nid in self.path_ids(node_id):
            step = self.nodes[nid].step
            if step is not None:
                steps.append(step)
        return tuple(steps)

    def append_rollout(self, solution: CandidateSolution, canonical_answer: str | None) -> None:
        self.rollout_history.append(solution)
        self._history_answers.append(canonical_answer)
        if canonical_answer is not None:
            self._answer_counts[canonical_answer] = self._answer_counts.get(canonical_answer, 0) + 1

    def history_answers(self) -> list[str | None]:
        return list(self._history_answers)

    def answer_fraction(self, canonical_answer: str | None) -> float:
        """Fraction of rollout history sharing ``canonical_answer``."""
        if canonical_answer is None or not self.rollout_history:
            return 0.0
        return self._answer_counts.get(canonical_answer, 0) / len(self.rollout_history)

    def answer_counts(self) -> dict[str, int]:
        return dict(self._answer_counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SearchTree):
            return NotImplemented
        return (
            self.problem_id == other.problem_id
            and self.root_id == other.root_id
            and self.nodes == other.nodes
            and self.rollout_history == other.rollout_history
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "root_id": self.root_id,
            "nodes": [self.nodes[nid].to_dict() for nid in sorted(self.nodes)],
            "rollout_history": [s.to_dict() for s in self.rollout_history],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SearchTree:
        from .answers import canonical_answer

        tree = cls.__new__(cls)
        tree.problem_id = d["problem_id"]
        tree.root_id = d["root_id"]
        tree.nodes = {}
        for nd in d["nodes"]:
            node = TreeNode.from_dict(nd)
            tree.nodes[node.node_id] = node
        tree._next_id = max(tree.nodes) + 1 if tree.nodes else 0
        tree.rollout_history = []
        tree._history_answers = []
        tree._answer_counts = {}
        for sd in d.get("rollout_history", []):
            sol = CandidateSolution.from_dict(sd)
            tree.append_rollout(sol, canonical_answer(sol.final_answer))
        return tree


@dataclass(frozen=True)
class LeafStats:
    """Leaf-population statistics behind global leaf selection."""

    mean: float
    stddev: float
    threshold: float
    leaf_count: int

    def __post_init__(self) -> None:
        if self.stddev < 0:
            raise ValueError("stddev must be >= 0")
        if self.leaf_count < 1:
            raise ValueError("leaf_count must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "stddev": self.stddev,
            "threshold": self.threshold,
            "leaf_count": self.leaf_count,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> LeafStats:
        return cls(d["mean"], d["stddev"], d["threshold"], d["leaf_count"])


@dataclass(frozen=True)
class SearchConfig:
    """All search hyperparameters.

    ``exploration_c`` and ``lambda_`` are ignored when ``algorithm`` is BEAM.
    ``step_budget`` counts selection-expansion cycles in the main loop;
    pre-expansion runs before the budget starts. A budget of 0 is allowed
    and means "pre-expansion only".
    """

    algorithm: Algorithm = Algorithm.MCTS
    exploration_c: float = 1.0
    lambda_: float = 1.0
    children_per_expansion: int = 3
    rollouts_per_simulation: int = 5
    sc_alpha: float = 0.5
    beam_width: int = 3
    pre_expansion_layers: int = 2
    step_budget: int = 30
    max_depth: int = 10
    tool_verification: bool = False
    rng_seed: int = 0
    answer_source: AnswerSource = AnswerSource.BEST_TERMINAL
    tool_penalty: float = 0.0
    beam_direct_scoring: bool = False
    time_limit_s: float | None = None

    def __post_init__(self) -> None:
        if self.exploration_c < 0:
            raise ValueError("exploration_c must be >= 0")
        if self.children_per_expansion < 1:
            raise ValueError("children_per_expansion must be >= 1")
        if self.rollouts_per_simulation < 1:
            raise ValueError("rollouts_per_simulation must be >= 1")
        if not 0.0 <= self.sc_alpha <= 1.0:
            raise ValueError("sc_alpha must lie in [0, 1]")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.pre_expansion_layers < 0:
            raise ValueError("pre_expansion_layers must be >= 0")
        if self.step_budget < 0:
            raise ValueError("step_budget must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 <= self.tool_penalty <= 1.0:
            raise ValueError("tool_penalty must lie in [0, 1]")
        if self.time_limit_s is not None and self.time_limit_s <= 0:
            raise ValueError("time_limit_s must be positive when set")

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm.value,
            "exploration_c": self.exploration_c,
            "lambda": self.lambda_,
            "children_per_expansion": self.children_per_expansion,
            "rollouts_per_simulation": self.rollouts_per_simulation,
            "sc_alpha": self.sc_alpha,
            "beam_width": self.beam_width,
            "pre_expansion_layers": self.pre_expansion_layers,
            "step_budget": self.step_budget,
            "max_depth": self.max_depth,
            "tool_verification": self.tool_verification,
            "rng_seed": self.rng_seed,
            "answer_source": self.answer_source.value,
            "tool_penalty": self.tool_penalty,
            "beam_direct_scoring": self.beam_direct_scoring,
            "time_limit_s": self.time_limit_s,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SearchConfig:
        defaults = cls()
        return cls(
            algorithm=Algorithm(d.get("algorithm", defaults.algorithm.value)),
            exploration_c=d.get("exploration_c", defaults.exploration_c),
            lambda_=d.get("lambda", defaults.lambda_),
            children_per_expansion=d.get("children_per_expansion", defaults.children_per_expansion),
            rollouts_per_simulation=d.get("rollouts_per_simulation", defaults.rollouts_per_simulation),
            sc_alpha=d.get("sc_alpha", defaults.sc_alpha),
            beam_width=d.get("beam_width", defaults.beam_width),
            pre_expansion_layers=d.get("pre_expansion_layers", defaults.pre_expansion_layers),
            step_budget=d.get("step_budget", defaults.step_budget),
            max_depth=d.get("max_depth", defaults.max_depth),
            tool_verification=d.get("tool_verification", defaults.tool_verification),
            rng_seed=d.get("rng_seed", defaults.rng_seed),
            answer_source=AnswerSource(d.get("answer_source", defaults.answer_source.value)),
            tool_penalty=d.get("tool_penalty", defaults.tool_penalty),
            beam_direct_scoring=d.get("beam_direct_scoring", defaults.beam_direct_scoring),
            time_limit_s=d.get("time_limit_s"),
        )


@dataclass(frozen=True)
class RewardScore:
    """Raw Yes/No probabilities and their softmax-normalized form."""

    p_yes: float
    p_no: float
    normalized_yes: float
    normalized_no: float

    def __post_init__(self) -> None:
        if abs(self.normalized_yes + self.normalized_no - 1.0) > 1e-12:
            raise ValueError("normalized probabilities must sum to 1")
        if not (0.0 < self.normalized_yes < 1.0 and 0.0 < self.normalized_no < 1.0):
            raise ValueError("normalized probabilities must lie in (0, 1)")

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_yes": self.p_yes,
            "p_no": self.p_no,
            "normalized_yes": self.normalized_yes,
            "normalized_no": self.normalized_no,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RewardScore:
        return cls(d["p_yes"], d["p_no"], d["normalized_yes"], d["normalized_no"])


@dataclass(frozen=True)
class LabeledEntry:
    problem: Problem
    solution: CandidateSolution

    def to_dict(self) -> dict[str, Any]:
        return {"problem": self.problem.to_dict(), "solution": self.solution.to_dict()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> LabeledEntry:
        return cls(Problem.from_dict(d["problem"]), CandidateSolution.from_dict(d["solution"]))


@dataclass(frozen=True)
class LabeledDataset:
    """A labeled training corpus: original, cleaned, or actively selected."""

    kind: DatasetKind
    entries: tuple[LabeledEntry, ...]

    def __post_init__(self) -> None:
        for entry in self.entries:
            if entry.solution.label == Label.UNLABELED:
                raise ValueError("labeled datasets admit only labeled entries")

    def by_problem(self) -> dict[str, list[LabeledEntry]]:
        grouped: dict[str, list[LabeledEntry]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.problem.id, []).append(entry)
        return grouped

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> LabeledDataset:
        return cls(
            kind=DatasetKind(d["kind"]),
            entries=tuple(LabeledEntry.from_dict(e) for e in d.get("entries", [])),
        )


@dataclass(frozen=True)
class PreferencePair:
    """A (correct, incorrect) solution pair for one problem."""

    problem: Problem
    positive: CandidateSolution
    negative: CandidateSolution

    def __post_init__(self) -> None:
        if self.positive.label != Label.CORRECT:
            raise ValueError("positive solution must be labeled correct")
        if self.negative.label != Label.INCORRECT:
            raise ValueError("negative solution must be labeled incorrect")
        if self.positive.problem_id != self.problem.id or self.negative.problem_id != self.problem.id:
            raise ValueError("pair members must reference the pair's problem")

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem": self.problem.to_dict(),
            "positive": self.positive.to_dict(),
            "negative": self.negative.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> PreferencePair:
        return cls(
            Problem.from_dict(d["problem"]),
            CandidateSolution.from_dict(d["positive"]),
            CandidateSolution.from_dict(d["negative"]),
        )


@dataclass(frozen=True)
class TraceEvent:
    """One event in a search run's trace.

    ``timestamp`` is a logical clock (0, 1, 2, ...) scoped to one run, so
    identical runs produce byte-identical trace files; wall-clock times live
    in the run manifest instead.
    """

    timestamp: int
    tree_id: str
    event: EventKind
    payload: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp": self.timestamp,
            "tree_id": self.tree_id,
            "event": self.event.value,
            "payload": dict(self.payload),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TraceEvent:
        return cls(
            timestamp=d["timestamp"],
            tree_id=d["tree_id"],
            event=EventKind(d["event"]),
            payload=dict(d.get("payload", {})),
        )
