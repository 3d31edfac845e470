from pathlib import Path

import pytest

from cfgames.errors import ParseError
from cfgames.generator import GenParams, gen_instance
from cfgames.instance import (
    instance_from_generated,
    parse_instance,
    parse_position,
    render_instance,
)

AB_GAME = Path(__file__).parent.parent / "docs" / "examples" / "ab.game"


def test_parse_running_example_file(ab_nfa, ab_grammar):
    instance = parse_instance(AB_GAME.read_text())
    assert instance.nfa == ab_nfa
    assert instance.grammar == ab_grammar
    assert instance.start == ("X",)
    assert instance.header  # leading comments preserved


def test_round_trip():
    original = parse_instance(AB_GAME.read_text())
    again = parse_instance(render_instance(original))
    assert again == original
    assert render_instance(again) == render_instance(original)


def test_round_trip_generated():
    for seed in (0, 1, 2):
        gen = instance_from_generated(gen_instance(GenParams(states=3, letters=2), seed))
        assert parse_instance(render_instance(gen)) == gen


def test_round_trip_zero_density():
    params = GenParams(states=3, letters=2, density=0.0)
    gen = instance_from_generated(gen_instance(params, 5))
    again = parse_instance(render_instance(gen))
    assert again.grammar.terminals == gen.grammar.terminals


def test_missing_grammar_section():
    text = "[automaton]\nstates: q0\ninitial: q0\nfinal: q0\ntrans:\nq0 a q0\n"
    with pytest.raises(ParseError):
        parse_instance(text)


def test_syntax_error_carries_line_number():
    bad = AB_GAME.read_text().replace("q0 a q1", "q0 a")
    with pytest.raises(ParseError) as err:
        parse_instance(bad)
    assert err.value.line == 8


def test_unknown_rule_symbol_rejected():
    bad = AB_GAME.read_text().replace("X -> a Y", "X -> c Y")
    with pytest.raises(ParseError):
        parse_instance(bad)


def test_undeclared_transition_letter_rejected():
    text = (
        "[automaton]\nstates: q0\nletters: a\ninitial: q0\nfinal: q0\n"
        "trans:\nq0 b q0\n[grammar]\nrefuter: X\nprover:\nrules:\nX -> _eps_\n"
    )
    with pytest.raises(ParseError) as err:
        parse_instance(text)
    assert "alphabet" in str(err.value)


def test_symbol_cannot_be_letter_and_nonterminal():
    bad = AB_GAME.read_text().replace("refuter: X", "refuter: a")
    with pytest.raises(ParseError):
        parse_instance(bad)


def test_parse_position():
    instance = parse_instance(AB_GAME.read_text())
    assert parse_position(instance, "Y") == ("Y",)
    assert parse_position(instance, "b X") == ("b", "X")
    assert parse_position(instance, "bX") == ("b", "X")  # compact single-char run
    assert parse_position(instance, "_eps_") == ()
    with pytest.raises(ValueError):
        parse_position(instance, "Z")
