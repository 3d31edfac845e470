import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cfgames.automaton import Nfa
from cfgames.grammar import GameGrammar
from cfgames import solver


@pytest.fixture(scope="session")
def ab_nfa():
    """Two-state automaton accepting (ab)*."""
    return Nfa(["q0", "q1"], ["a", "b"], 0, [0], [(0, "a", 1), (1, "b", 0)])


@pytest.fixture(scope="session")
def ab_grammar():
    """X -> aY | eps owned by refuter, Y -> bX owned by prover."""
    return GameGrammar(
        ["X"], ["Y"], ["a", "b"],
        [("X", ("a", "Y")), ("X", ()), ("Y", ("b", "X"))],
    )


@pytest.fixture(scope="session")
def ab_system(ab_grammar, ab_nfa):
    return solver.build_system(ab_grammar, ab_nfa)


@pytest.fixture(scope="session")
def ab_solution(ab_system):
    return solver.kleene_naive(ab_system)
