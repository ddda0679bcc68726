"""Python access to the fifth constraint engine."""

import json

from ._core import (
    Error,
    ParseError,
    StructuralError,
    emit_countdown_program,
    emit_fact_program,
    emit_horizon_program,
    emit_jobshop_program,
    emit_queens_program,
    emit_sendmore_program,
    generate_random_csp,
    run_cli,
    self_test,
)
from . import _core

__all__ = [
    "Error",
    "ParseError",
    "StructuralError",
    "emit_countdown_program",
    "emit_fact_program",
    "emit_horizon_program",
    "emit_jobshop_program",
    "emit_queens_program",
    "emit_sendmore_program",
    "generate_random_csp",
    "optimize",
    "run_cli",
    "self_test",
    "solve",
]


def solve(text, **budgets):
    """All solutions of a program, as the solution JSON document."""
    return json.loads(_core.solve_json(text, **budgets))


def optimize(text, **budgets):
    """Branch-and-bound optimum of a program whose query minimizes a cell."""
    return json.loads(_core.optimize_json(text, **budgets))
