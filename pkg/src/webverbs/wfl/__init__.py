"""Workflow language: parser, printer, type checker and interpreter."""

from .ast import WorkflowProgram
from .checker import CheckResult, WorkflowTypeError, check_predicate, check_program, type_check
from .interp import Interpreter, RuntimeTypeMismatch, WorkflowRuntimeError
from .parser import ParseError, parse_expr, parse_workflow
from .printer import print_expr, print_program

__all__ = [
    "WorkflowProgram", "CheckResult", "WorkflowTypeError", "check_predicate", "check_program",
    "type_check", "Interpreter", "RuntimeTypeMismatch", "WorkflowRuntimeError", "ParseError",
    "parse_expr", "parse_workflow", "print_expr", "print_program",
]
