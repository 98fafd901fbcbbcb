"""Canonical answer comparison rules."""

from __future__ import annotations

import pytest

from rgsearch.core.answers import answers_match, canonical_answer


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("42", "42"),
        ("  42  ", "42"),
        ("\\boxed{42}", "42"),
        ("\\boxed{\\frac{1}{2}}", "\\frac{1}{2}"),
        ("1/2", "1/2"),
        ("0.5", "1/2"),
        ("2/4", "1/2"),
        ("  x +  y ", "x + y"),
        ("-3", "-3"),
        ("3.0", "3"),
        ("\\boxed{1} and \\boxed{2}", "\\boxed{1} and \\boxed{2}"),  # wrapper must span the string
        (None, None),
    ],
)
def test_canonical_answer(raw, expected):
    assert canonical_answer(raw) == expected


@pytest.mark.parametrize(
    "a,b,match",
    [
        ("42", "42", True),
        ("42", "\\boxed{42}", True),
        ("1/2", "0.5", True),
        ("1/2", "\\boxed{1/2}", True),
        (" 7 ", "7", True),
        ("42", "41", False),
        ("x", "y", False),
        (None, "42", False),
        ("42", None, False),
        ("1/3", "0.3333", False),  # inexact decimal stays distinct
    ],
)
def test_answers_match(a, b, match):
    assert answers_match(a, b) is match
