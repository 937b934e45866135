"""Infinite-step opacity: verification and supervisor synthesis for partially observed automata."""
from .automaton import Automaton, enumerate_language, load_automaton, parse_automaton, project, run
from .costs import CostFunction
from .errors import (
    FixtureConstraintError,
    OpacityError,
    ParseError,
    ResourceLimitError,
    SemanticError,
    UnsolvableError,
)
from .estimation import verify_infinite_step_opacity
from .supervisor import Supervisor, closed_loop
from .synth_qual import extract_supervisor, solve
from .synth_quant import synthesize

__all__ = [
    "Automaton", "CostFunction", "Supervisor",
    "parse_automaton", "load_automaton", "project", "run", "enumerate_language",
    "verify_infinite_step_opacity", "solve", "extract_supervisor", "synthesize", "closed_loop",
    "OpacityError", "ParseError", "SemanticError", "ResourceLimitError", "UnsolvableError",
    "FixtureConstraintError",
]
