"""Canonical final-answer comparison.

Two answers match when, after whitespace normalization and stripping an
outer ``\\boxed{...}`` wrapper, they are equal as strings, or both parse as
rationals and are equal as rationals (so "0.5", "1/2", and " 1/2 " agree).
"""

from __future__ import annotations

import re
from fractions import Fraction

_WS_RUN = re.compile(r"\s+")
_BOXED = "\\boxed{"


def _strip_boxed(text: str) -> str:
    """Strip one outer \\boxed{...} wrapper when it spans the whole string."""
    if not text.startswith(_BOXED) or not text.endswith("}"):
        return text
    depth = 1
    for i in range(len(_BOXED), len(text)):
        ch = text[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                # Wrapper only counts if its closer is the final character.
                return text[len(_BOXED):i] if i == len(text) - 1 else text
    return text


def canonical_answer(answer: str | None) -> str | None:
    """Normalize an answer to its canonical comparison key.

    Whitespace runs collapse to single spaces, an outer boxed wrapper is
    stripped, and rational-looking answers reduce to ``str(Fraction(...))``.
    """
    if answer is None:
        return None
    text = _WS_RUN.sub(" ", answer).strip()
    text = _strip_boxed(text).strip()
    compact = text.replace(" ", "")
    try:
        return str(Fraction(compact))
    except (ValueError, ZeroDivisionError):
        return text


def answers_match(a: str | None, b: str | None) -> bool:
    """Whether two answers agree under canonical comparison."""
    ca, cb = canonical_answer(a), canonical_answer(b)
    if ca is None or cb is None:
        return False
    return ca == cb
