from .expr import (
    BinOp,
    DivisionByZero,
    EvalError,
    Expr,
    ExprSyntaxError,
    Group,
    Neg,
    Num,
    Overflow,
    eval_expr,
    parse_expr,
)
from .solution import (
    FINAL_HEADER,
    FORMULATION_HEADER,
    MalformedFormat,
    UnbalancedBraces,
    extract_boxed,
    format_solution,
    format_steps,
    has_final_answer,
    parse_solution,
)
from .verify import EquationCheck, extract_equations, step_has_mismatch, values_match, verify_step

__all__ = [
    "BinOp",
    "DivisionByZero",
    "EquationCheck",
    "EvalError",
    "Expr",
    "ExprSyntaxError",
    "FINAL_HEADER",
    "FORMULATION_HEADER",
    "Group",
    "MalformedFormat",
    "Neg",
    "Num",
    "Overflow",
    "UnbalancedBraces",
    "eval_expr",
    "extract_boxed",
    "extract_equations",
    "format_solution",
    "format_steps",
    "has_final_answer",
    "parse_expr",
    "parse_solution",
    "step_has_mismatch",
    "values_match",
    "verify_step",
]
