"""Equation extraction from step text and calculator-style verification."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core.types import Step
from .expr import EvalError, Expr, Token, Value, eval_expr, lex, parse_tokens

# Rational-vs-rational comparisons are exact; anything involving a float
# uses this relative tolerance.
REL_TOLERANCE = 1e-6
ABS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class EquationCheck:
    """Outcome of recomputing one ``lhs = rhs`` claim found in a step."""

    source_span: tuple[int, int]
    lhs_text: str
    rhs_text: str
    recomputed_value: Value | None
    matches: bool
    note: str | None = None


def _longest_suffix_parse(tokens: list[Token]) -> tuple[Expr, Token] | None:
    """Parse the longest token suffix as an expression; None if none parses."""
    for start in range(len(tokens)):
        try:
            return parse_tokens(tokens[start:]), tokens[start]
        except Exception:
            continue
    return None


def _longest_prefix_parse(tokens: list[Token]) -> tuple[Expr, Token] | None:
    """Parse the longest token prefix as an expression; None if none parses."""
    for end in range(len(tokens), 0, -1):
        try:
            return parse_tokens(tokens[:end]), tokens[end - 1]
        except Exception:
            continue
    return None


def extract_equations(step_body: str) -> list[tuple[str, str, tuple[int, int]]]:
    """Find every maximal ``<expr> = <expr>`` substring in ``step_body``.

    Both sides must parse under the arithmetic grammar; each '=' sign is
    extended maximally left and right (longest parse wins), and candidates
    whose sides do not parse are skipped. Equations never span lines.
    """
    equations: list[tuple[str, str, tuple[int, int]]] = []
    for pos, ch in enumerate(step_body):
        if ch != "=":
            continue
        line_start = step_body.rfind("\n", 0, pos) + 1
        line_end = step_body.find("\n", pos)
        if line_end == -1:
            line_end = len(step_body)

        left_segment = step_body[line_start:pos]
        right_segment = step_body[pos + 1:line_end]
        lhs = _longest_suffix_parse(lex(left_segment))
        if lhs is None:
            continue
        rhs = _longest_prefix_parse(lex(right_segment))
        if rhs is None:
            continue

        _, lhs_first = lhs
        _, rhs_last = rhs
        lhs_start = line_start + lhs_first.start
        lhs_text = left_segment[lhs_first.start:].rstrip()
        rhs_text = right_segment[:rhs_last.end].strip()
        rhs_end = pos + 1 + rhs_last.end
        equations.append((lhs_text, rhs_text, (lhs_start, rhs_end)))
    return equations


def values_match(recomputed: Value, claimed: Value) -> bool:
    """Tolerance rule: exact for rational pairs, else relative 1e-6."""
    if not isinstance(recomputed, float) and not isinstance(claimed, float):
        return recomputed == claimed
    return math.isclose(float(recomputed), float(claimed), rel_tol=REL_TOLERANCE, abs_tol=ABS_TOLERANCE)


def verify_step(step: Step) -> list[EquationCheck]:
    """Recompute every equation in a step's body.

    Pure function: one EquationCheck per extracted equation; evaluation
    failures yield ``matches=False`` with a note instead of raising.
    """
    from .expr import parse_expr

    checks: list[EquationCheck] = []
    for lhs_text, rhs_text, span in extract_equations(step.body):
        try:
            recomputed = eval_expr(parse_expr(lhs_text))
            claimed = eval_expr(parse_expr(rhs_text))
        except (EvalError, ValueError) as exc:
            checks.append(
                EquationCheck(
                    source_span=span,
                    lhs_text=lhs_text,
                    rhs_text=rhs_text,
                    recomputed_value=None,
                    matches=False,
                    note=f"evaluation failed: {exc}",
                )
            )
            continue
        checks.append(
            EquationCheck(
                source_span=span,
                lhs_text=lhs_text,
                rhs_text=rhs_text,
                recomputed_value=recomputed,
                matches=values_match(recomputed, claimed),
            )
        )
    return checks


def step_has_mismatch(step: Step) -> bool:
    """Whether any equation in the step fails verification."""
    return any(not check.matches for check in verify_step(step))
