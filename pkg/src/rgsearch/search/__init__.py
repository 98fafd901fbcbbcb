from .beam import beam_search
from .engine import (
    DepthExceeded,
    NoChildren,
    NoLeaves,
    SearchError,
    SearchOutcome,
    backpropagate,
    descend_to_leaf,
    expand,
    global_leaf_select,
    run_search,
    simulate,
    ucb_select,
)
from .trace import TraceRecorder, event_json

__all__ = [
    "DepthExceeded",
    "NoChildren",
    "NoLeaves",
    "SearchError",
    "SearchOutcome",
    "TraceRecorder",
    "backpropagate",
    "beam_search",
    "descend_to_leaf",
    "event_json",
    "expand",
    "global_leaf_select",
    "run_search",
    "simulate",
    "ucb_select",
]
