from .answers import answers_match, canonical_answer
from .types import (
    Algorithm,
    AnswerSource,
    CandidateSolution,
    DatasetKind,
    EventKind,
    Label,
    LabeledDataset,
    LabeledEntry,
    LeafStats,
    PreferencePair,
    Problem,
    RewardScore,
    SearchConfig,
    SearchTree,
    Step,
    TraceEvent,
    TreeNode,
    check_solution,
)
from .validate import validate_tree

__all__ = [
    "Algorithm",
    "AnswerSource",
    "CandidateSolution",
    "DatasetKind",
    "EventKind",
    "Label",
    "LabeledDataset",
    "LabeledEntry",
    "LeafStats",
    "PreferencePair",
    "Problem",
    "RewardScore",
    "SearchConfig",
    "SearchTree",
    "Step",
    "TraceEvent",
    "TreeNode",
    "answers_match",
    "canonical_answer",
    "check_solution",
    "validate_tree",
]
