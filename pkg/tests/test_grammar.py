import random

import pytest

from cfgames.grammar import (
    GameGrammar,
    PROVER,
    REFUTER,
    derive,
    leftmost_split,
    legal_rules,
    owner_of,
    validate,
)


def test_owner_of(ab_grammar):
    assert owner_of(ab_grammar, ("X",)) == REFUTER
    assert owner_of(ab_grammar, ("a", "b")) == REFUTER
    assert owner_of(ab_grammar, ("a", "Y")) == PROVER
    assert owner_of(ab_grammar, ()) == REFUTER


def test_leftmost_split(ab_grammar):
    g = GameGrammar(
        ["X", "Y"], [], ["a", "b", "c"],
        [("X", ()), ("Y", ())],
    )
    assert leftmost_split(g, ("a", "b", "X", "c", "Y")) == (("a", "b"), "X", ("c", "Y"))
    assert leftmost_split(g, ("a", "b")) is None
    assert leftmost_split(g, ("X",)) == ((), "X", ())


def test_derive(ab_grammar):
    assert derive(ab_grammar, ("X",), 0) == ("a", "Y")
    assert derive(ab_grammar, ("b", "X"), 1) == ("b",)
    with pytest.raises(ValueError):
        derive(ab_grammar, ("a", "b"), 0)
    with pytest.raises(ValueError):
        derive(ab_grammar, ("X",), 2)  # lhs mismatch: rule 2 rewrites Y
    with pytest.raises(ValueError):
        derive(ab_grammar, ("X",), 99)


def test_validate_running_example(ab_grammar):
    assert validate(ab_grammar) == []


def test_validate_missing_rule():
    g = GameGrammar(["X"], ["Y"], ["a"], [("X", ("a",))])
    problems = validate(g)
    assert len(problems) == 1 and "Y" in problems[0]


def test_validate_undeclared_symbol():
    g = GameGrammar(["X"], [], ["a"], [("X", ("a", "Z"))])
    problems = validate(g)
    assert len(problems) == 1 and "Z" in problems[0]


def test_derive_keeps_terminal_prefix(ab_grammar):
    rng = random.Random(7)
    for _ in range(100):
        form = ("X",)
        seen_prefix = ()
        while leftmost_split(ab_grammar, form) is not None and len(form) < 30:
            prefix, _, _ = leftmost_split(ab_grammar, form)
            assert prefix[: len(seen_prefix)] == seen_prefix
            seen_prefix = prefix
            rules = legal_rules(ab_grammar, form)
            form = derive(ab_grammar, form, rng.choice(rules).index)


def test_maximal_positions_are_terminal_words(ab_grammar):
    assert legal_rules(ab_grammar, ("a", "b")) == ()
    assert len(legal_rules(ab_grammar, ("X",))) == 2


def test_render_form(ab_grammar):
    assert ab_grammar.render_form(("a", "Y")) == "aY"
    assert ab_grammar.render_form(()) == "_eps_"
    wide = GameGrammar(["Start"], [], ["tok"], [("Start", ("tok",))])
    assert wide.render_form(("tok", "Start")) == "tok Start"
