"""Prompt templates for the policy and reward models.

These are versioned text assets: the strings below are the interface to
any inference server, so their bytes must not drift. Substitution uses
plain string replacement because the templates themselves contain braces.
"""

from __future__ import annotations

from ..core.types import CandidateSolution, Problem

REWARD_MODEL_TEMPLATE = (
    "### Outcome-supervised Reward Model\n"
    "Given the problem and the solution from the student, you should verify the correctness "
    "of the final answer. It should be noted that the final answer is put in boxed{}.\n"
    "\n"
    "{Problem} {Generated Solution}\n"
    "\n"
    "Is the answer correct (Yes/No)?"
)

POLICY_TEMPLATE = (
    "Analyze and respond to the following question step by step. Begin by rephrasing the "
    "problem in your own words to capture its essential meaning accurately. Then, proceed to "
    "solve the problem systematically, ensuring that each step is introduced with a concise "
    "heading that summarizes its objective. Follow this with detailed explanations of the "
    "calculations or methodologies employed in the problem-solving process. Finally, present "
    "the final answer within boxed{}.\n"
    "{Problem}"
)


def render_rm_prompt(problem: Problem, solution: CandidateSolution) -> str:
    """Instantiate the reward-model template for one (problem, solution)."""
    return REWARD_MODEL_TEMPLATE.replace("{Problem}", problem.statement).replace(
        "{Generated Solution}", solution.raw_text
    )


def render_policy_prompt(problem: Problem) -> str:
    """Instantiate the policy template for one problem."""
    return POLICY_TEMPLATE.replace("{Problem}", problem.statement)
