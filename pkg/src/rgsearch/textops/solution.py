"""Parsing and formatting of step-by-step solution text.

The canonical layout is a sequence of bold-header blocks:

    **Problem Formulation**
    <rephrasing>

    **Step 1: <title>**
    <body>

    **Final Answer**
    \\boxed{<answer>}

Step headers accept ``**Step i: title**`` and ``**Step i. title**``; any
other header variant fails parsing so that the canonical round-trip
``format_solution(parse_solution(t)) == t`` stays exact. Block bodies must
not themselves contain header-shaped lines.
"""

from __future__ import annotations

import re

from ..core.types import CandidateSolution, Step

FORMULATION_HEADER = "**Problem Formulation**"
FINAL_HEADER = "**Final Answer**"

_STEP_HEADER_RE = re.compile(r"^\*\*Step (\d+)[:.][ \t]?(.*?)\*\*[ \t]*$", re.MULTILINE)
_FORMULATION_RE = re.compile(r"^\*\*Problem Formulation\*\*[ \t]*$", re.MULTILINE)
_FINAL_RE = re.compile(r"^\*\*Final Answer\*\*[ \t]*$", re.MULTILINE)

_BOXED_MARKER = "\\boxed{"


class MalformedFormat(ValueError):
    """Raised when text has neither a step header nor a final-answer block."""


class UnbalancedBraces(ValueError):
    """Raised when a \\boxed{ opener has no balanced closing brace."""


def extract_boxed(text: str) -> str | None:
    """Content of the last ``\\boxed{...}`` in ``text``, or None if absent.

    Brace matching is balanced, so nested braces are kept intact.
    """
    start = text.rfind(_BOXED_MARKER)
    if start == -1:
        return None
    depth = 1
    for i in range(start + len(_BOXED_MARKER), len(text)):
        ch = text[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start + len(_BOXED_MARKER):i]
    raise UnbalancedBraces(f"\\boxed{{ at offset {start} never closes")


def has_final_answer(text: str) -> bool:
    """Whether the final-answer extractor succeeds on ``text``."""
    try:
        return extract_boxed(text) is not None
    except UnbalancedBraces:
        return False


def parse_solution(raw_text: str, problem_id: str = "") -> CandidateSolution:
    """Parse step-format text into a CandidateSolution.

    Splits on the formulation header, step headers (indices are taken as
    written), and the final-answer header; ``final_answer`` is the boxed
    content of the final block when present. Raises MalformedFormat when
    neither a step header nor a final-answer block is found.
    """
    headers: list[tuple[int, int, str, int, str]] = []
    for m in _FORMULATION_RE.finditer(raw_text):
        headers.append((m.start(), m.end(), "formulation", 0, ""))
    for m in _STEP_HEADER_RE.finditer(raw_text):
        headers.append((m.start(), m.end(), "step", int(m.group(1)), m.group(2)))
    for m in _FINAL_RE.finditer(raw_text):
        headers.append((m.start(), m.end(), "final", 0, ""))
    headers.sort(key=lambda h: h[0])

    if not any(kind == "step" for _, _, kind, _, _ in headers) and not any(
        kind == "final" for _, _, kind, _, _ in headers
    ):
        raise MalformedFormat("no step header and no final-answer block found")

    rephrasing = ""
    steps: list[Step] = []
    final_answer: str | None = None
    for i, (_, end, kind, index, title) in enumerate(headers):
        block_end = headers[i + 1][0] if i + 1 < len(headers) else len(raw_text)
        body = raw_text[end:block_end].strip()
        if kind == "formulation":
            rephrasing = body
        elif kind == "step":
            steps.append(Step(index=index, title=title, body=body))
        else:
            final_answer = extract_boxed(body)

    return CandidateSolution(
        problem_id=problem_id,
        raw_text=raw_text,
        rephrasing=rephrasing,
        steps=tuple(steps),
        final_answer=final_answer,
    )


def format_steps(rephrasing: str, steps: tuple[Step, ...] | list[Step]) -> str:
    """Canonical text of a partial solution (no final-answer block)."""
    blocks = []
    if rephrasing:
        blocks.append(f"{FORMULATION_HEADER}\n{rephrasing}")
    for step in steps:
        blocks.append(f"**Step {step.index}: {step.title}**\n{step.body}")
    return "\n\n".join(blocks)


def format_solution(solution: CandidateSolution) -> str:
    """Canonical text of a complete solution.

    The final block is exactly ``\\boxed{answer}``, so any text emitted here
    parses back to an equal solution and reformats to identical bytes.
    """
    blocks = []
    prefix = format_steps(solution.rephrasing, solution.steps)
    if prefix:
        blocks.append(prefix)
    if solution.final_answer is not None:
        blocks.append(f"{FINAL_HEADER}\n\\boxed{{{solution.final_answer}}}")
    return "\n\n".join(blocks)
