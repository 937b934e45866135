"""Oracle-side checks shared by the property and acceptance suites."""
from __future__ import annotations

from opacsynth.automaton import Automaton
from opacsynth.game import effective_part
from opacsynth.oracle import exhaustive_supervisor_search
from opacsynth.supervisor import Supervisor


def larger_initial_decisions(A: Automaton, S: Supervisor) -> list:
    """Decisions whose effective part strictly contains the supervisor's first one."""
    start = frozenset({A.initial})
    mine = effective_part(A, start, S.decision(S.initial))
    return [g for g in A.all_decisions() if mine < effective_part(A, start, g)]


def initial_decision_is_maximal(A: Automaton, S: Supervisor, depth: int) -> bool:
    """No strictly more permissive first decision admits any safe continuation."""
    bigger = larger_initial_decisions(A, S)
    if not bigger:
        return True
    return not exhaustive_supervisor_search(A, depth, first=bigger).solvable
