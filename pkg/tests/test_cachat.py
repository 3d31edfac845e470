import random

from cfgames import solver
from cfgames.cachat import CachatSolver, cachat_refuter_wins, config_of, encode, saturate
from cfgames.generator import GenParams, gen_instance
from cfgames.grammar import PROVER, REFUTER
from helpers import rand_word


def test_encode_running_example(ab_grammar, ab_nfa):
    pds, pafa = encode(ab_grammar, ab_nfa)
    # subset structure of (ab)* is already minimal: {q0}, {q1}, {}
    assert pds.dfa.n_states == 3
    assert len(pds.controls) == 6
    # pop transition follows the subset post-image
    delta = {(s, a): t for s, a, t in pds.dfa.transitions}
    control = (pds.dfa.initial, REFUTER)
    ((target, push),) = pds.moves[(control, "a")]
    assert target == (delta[(pds.dfa.initial, "a")], REFUTER) and push == ()
    # owner switch for the prover-owned Y
    ((target, push),) = pds.moves[(control, "Y")]
    assert target == (pds.dfa.initial, PROVER) and push == ("Y",)
    # rule application for the refuter-owned X
    options = pds.moves[(control, "X")]
    assert [push for _, push in options] == [("a", "Y"), ()]


def test_config_of(ab_grammar, ab_nfa):
    pds, _ = encode(ab_grammar, ab_nfa)
    control, stack = config_of(pds, ("Y",))
    assert control == (pds.dfa.initial, PROVER) and stack == ("Y",)
    control, stack = config_of(pds, ("a", "b"))
    assert control == (pds.dfa.initial, REFUTER) and stack == ()
    control, stack = config_of(pds, ("a", "Y"))
    assert control[1] == PROVER and stack == ("Y",)


def test_target_configs_stay_accepted(ab_grammar, ab_nfa):
    pds, pafa = encode(ab_grammar, ab_nfa)
    targets = [
        (control, ())
        for control in pds.controls
        if control in pafa.accepting
    ]
    for control, stack in targets:
        assert pafa.accepts_config(control, stack)
    saturate(pds, pafa)
    for control, stack in targets:
        assert pafa.accepts_config(control, stack)


def test_saturation_idempotent(ab_grammar, ab_nfa):
    pds, pafa = encode(ab_grammar, ab_nfa)
    saturate(pds, pafa)
    size = pafa.size()
    saturate(pds, pafa)
    assert pafa.size() == size


def test_running_example_winners(ab_grammar, ab_nfa):
    cs = CachatSolver(ab_grammar, ab_nfa)
    assert cs.refuter_wins(("Y",))
    assert not cs.refuter_wins(("X",))
    assert cs.stats.engine == "cachat"


def test_terminal_words_decided_by_membership(ab_grammar, ab_nfa):
    cs = CachatSolver(ab_grammar, ab_nfa)
    rng = random.Random(12)
    for _ in range(50):
        w = rand_word(rng, ab_nfa.alphabet, 6)
        assert cs.refuter_wins(w) == (not ab_nfa.accepts(w))


def test_minimization_flag_agrees(ab_grammar, ab_nfa):
    for form in (("X",), ("Y",), ("b", "X")):
        assert cachat_refuter_wins(
            ab_grammar, ab_nfa, form, minimize_dfa=True
        ) == cachat_refuter_wins(ab_grammar, ab_nfa, form, minimize_dfa=False)


def test_agreement_with_summary_solver():
    for seed in range(120):
        params = GenParams(
            states=2 + seed % 3,
            letters=2,
            refuter_nonterminals=2,
            prover_nonterminals=2,
            density=1.0 if seed % 2 else 2.0,
            final_fraction=0.25 if seed % 2 else 0.5,
        )
        inst = gen_instance(params, 3_000 + seed)
        sol = solver.kleene_worklist(solver.build_system(inst.grammar, inst.nfa))
        cs = CachatSolver(inst.grammar, inst.nfa)
        for x in inst.grammar.nonterminals:
            assert cs.refuter_wins((x,)) == solver.refuter_wins(sol, (x,)), (
                inst.seed,
                x,
            )
