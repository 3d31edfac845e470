"""Saturation baseline: encode the game as a pushdown reachability game.

A sentential form wXb becomes a pushdown configuration whose control state
tracks the determinized automaton state after reading w (tagged with the
player to move) and whose stack holds Xb.  The refuter's winning region is
computed by saturating an alternating automaton over the stack alphabet
towards the target set: empty stack in a control state whose automaton
state avoids every final state.

Entirely independent of the summary solver; used as a correctness oracle
and as the benchmark competitor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .automaton import Nfa, determinize, minimize
from .errors import SolveTimeout
from .grammar import PROVER, REFUTER, GameGrammar, SententialForm, leftmost_split
from .solver import SolveStats

Control = tuple[int, str]  # (DFA state, player to move)


@dataclass
class Pds:
    """Pushdown game: control states, stack alphabet, and per-player moves."""

    controls: tuple[Control, ...]
    stack_alphabet: tuple[str, ...]
    moves: dict[tuple[Control, str], tuple[tuple[Control, SententialForm], ...]]
    dfa: Nfa
    grammar: GameGrammar


class PAfa:
    """Alternating automaton over the stack alphabet.

    A configuration (p, u) is accepted iff some run tree from p consumes u
    with every branch ending in an accepting state.
    """

    def __init__(self, states: tuple[Control, ...], accepting: frozenset[Control]):
        self.states = states
        self.accepting = accepting
        self.trans: dict[tuple[Control, str], set[frozenset[Control]]] = {}

    def successors(self, state: Control, symbol: str) -> set[frozenset[Control]]:
        return self.trans.get((state, symbol), set())

    def add(self, state: Control, symbol: str, targets: frozenset[Control]) -> bool:
        bucket = self.trans.setdefault((state, symbol), set())
        if targets in bucket:
            return False
        bucket.add(targets)
        return True

    def size(self) -> int:
        return sum(len(v) for v in self.trans.values())

    def run_endpoints(
        self,
        state: Control,
        word: SententialForm,
        memo: dict[tuple[Control, SententialForm], frozenset[frozenset[Control]]],
    ) -> frozenset[frozenset[Control]]:
        """All conjunctive state sets reachable by consuming the word."""
        key = (state, word)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if not word:
            result = frozenset({frozenset({state})})
        else:
            head, rest = word[0], word[1:]
            collected: set[frozenset[Control]] = set()
            for branch in self.successors(state, head):
                # extend every state of the conjunctive branch through the rest
                partial: set[frozenset[Control]] = {frozenset()}
                for t in branch:
                    options = self.run_endpoints(t, rest, memo)
                    if not options:
                        partial = set()
                        break
                    partial = {acc | opt for acc in partial for opt in options}
                collected |= partial
            result = frozenset(collected)
        memo[key] = result
        return result

    def accepts_config(self, state: Control, word: SententialForm) -> bool:
        memo: dict = {}
        return any(
            endpoint <= self.accepting
            for endpoint in self.run_endpoints(state, word, memo)
        )


def encode(
    grammar: GameGrammar, nfa: Nfa, minimize_dfa: bool = True
) -> tuple[Pds, PAfa]:
    """Build the pushdown game and the target automaton for one instance."""
    dfa = determinize(nfa)
    if minimize_dfa:
        dfa = minimize(dfa)
    delta = {(s, a): t for s, a, t in dfa.transitions}
    players = (REFUTER, PROVER)
    controls = tuple((d, pl) for d in range(dfa.n_states) for pl in players)
    stack_alphabet = grammar.nonterminals + grammar.terminals
    moves: dict[tuple[Control, str], tuple[tuple[Control, SententialForm], ...]] = {}
    for d in range(dfa.n_states):
        for pl in players:
            control = (d, pl)
            for a in grammar.terminals:
                moves[(control, a)] = (((delta[(d, a)], pl), ()),)
            for x in grammar.nonterminals:
                owner = grammar.owner[x]
                if owner != pl:
                    moves[(control, x)] = (((d, owner), (x,)),)
                else:
                    moves[(control, x)] = tuple(
                        (control, rule.rhs) for rule in grammar.rules_for[x]
                    )
    accepting = frozenset(
        (d, pl) for d in range(dfa.n_states) if d not in dfa.finals for pl in players
    )
    pds = Pds(controls, stack_alphabet, moves, dfa, grammar)
    return pds, PAfa(controls, accepting)


def saturate(pds: Pds, pafa: PAfa, deadline: Optional[float] = None) -> PAfa:
    """Round-based saturation to the least fixed point.

    Per round, against the automaton as of the round start: a refuter
    control gains a transition for each run of some pushdown move; a prover
    control gains the union over one run per move.  Run queries are
    memoized per (state, stack suffix) within the round.
    """
    rounds = 0
    while True:
        if deadline is not None and time.monotonic() > deadline:
            raise SolveTimeout()
        rounds += 1
        memo: dict = {}
        additions: list[tuple[Control, str, frozenset[Control]]] = []
        for (control, symbol), options in pds.moves.items():
            _, player = control
            endpoint_sets = [
                pafa.run_endpoints(target, push, memo) for target, push in options
            ]
            if player == REFUTER:
                for endpoints in endpoint_sets:
                    for s in endpoints:
                        additions.append((control, symbol, s))
            else:
                if any(not endpoints for endpoints in endpoint_sets):
                    continue
                combos: set[frozenset[Control]] = {frozenset()}
                for endpoints in endpoint_sets:
                    combos = {acc | s for acc in combos for s in endpoints}
                for s in combos:
                    additions.append((control, symbol, s))
        changed = False
        for control, symbol, targets in additions:
            if pafa.add(control, symbol, targets):
                changed = True
        if not changed:
            pafa.saturation_rounds = rounds
            return pafa


def config_of(pds: Pds, form: SententialForm) -> tuple[Control, SententialForm]:
    """Configuration of a sentential form: DFA state after the terminal
    prefix, owner tag of the leftmost non-terminal (refuter for words)."""
    delta = {(s, a): t for s, a, t in pds.dfa.transitions}
    split = leftmost_split(pds.grammar, form)
    if split is None:
        prefix, rest, owner = form, (), REFUTER
    else:
        prefix, head, suffix = split
        rest = (head,) + suffix
        owner = pds.grammar.owner[head]
    d = pds.dfa.initial
    for a in prefix:
        d = delta[(d, a)]
    return (d, owner), rest


def cachat_refuter_wins(
    grammar: GameGrammar,
    nfa: Nfa,
    form: SententialForm,
    minimize_dfa: bool = True,
    deadline: Optional[float] = None,
) -> bool:
    pds, pafa = encode(grammar, nfa, minimize_dfa)
    saturate(pds, pafa, deadline)
    control, stack = config_of(pds, form)
    return pafa.accepts_config(control, stack)


class CachatSolver:
    """Saturates once per instance and answers membership queries."""

    def __init__(
        self,
        grammar: GameGrammar,
        nfa: Nfa,
        minimize_dfa: bool = True,
        deadline: Optional[float] = None,
    ):
        start = time.monotonic()
        self.pds, self.pafa = encode(grammar, nfa, minimize_dfa)
        before = self.pafa.size()
        saturate(self.pds, self.pafa, deadline)
        self.stats = SolveStats(
            engine="cachat",
            rounds=self.pafa.saturation_rounds,
            updates=self.pafa.size() - before,
            clause_counts={},
            wall_ms=(time.monotonic() - start) * 1000.0,
        )

    def refuter_wins(self, form: SententialForm) -> bool:
        control, stack = config_of(self.pds, form)
        return self.pafa.accepts_config(control, stack)
