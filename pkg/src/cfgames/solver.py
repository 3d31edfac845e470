"""Equation system over CNF formulas and its least-fixed-point engines.

One equation per non-terminal: prover-owned combine their rules by
conjunction, refuter-owned by disjunction; concatenation on right-hand
sides becomes relational composition.  Both engines iterate from FALSE.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import formula as fm
from .automaton import Box, Nfa, box_rejecting, letter_box
from .errors import InternalInvariantError, SolveTimeout
from .grammar import PROVER, GameGrammar, SententialForm, validate


@dataclass
class SolveStats:
    engine: str
    rounds: int
    updates: int
    clause_counts: dict[str, int]
    wall_ms: float


class EquationSystem:
    """The solved game's equations plus the dependency graph between them."""

    def __init__(self, grammar: GameGrammar, nfa: Nfa):
        problems = validate(grammar)
        if set(grammar.terminals) != set(nfa.alphabet):
            problems.append(
                f"grammar terminals {sorted(grammar.terminals)} differ from "
                f"automaton alphabet {sorted(nfa.alphabet)}"
            )
        if problems:
            raise ValueError("; ".join(problems))
        self.grammar = grammar
        self.nfa = nfa
        self.letter_atoms = {a: fm.atom(letter_box(nfa, a)) for a in nfa.alphabet}
        self.identity_atom = fm.identity_atom(nfa.n_states)
        self.combiner = {
            x: (fm.conj if grammar.owner[x] == PROVER else fm.disj)
            for x in grammar.nonterminals
        }
        self.rhs_of = {
            x: [rule.rhs for rule in grammar.rules_for[x]] for x in grammar.nonterminals
        }
        self.deps = {
            x: {s for rhs in self.rhs_of[x] for s in rhs if grammar.is_nonterminal(s)}
            for x in grammar.nonterminals
        }
        self.dependents = {
            x: tuple(y for y in grammar.nonterminals if x in self.deps[y])
            for x in grammar.nonterminals
        }

    def eval_rhs(self, rhs: SententialForm, env: dict[str, fm.Formula]) -> fm.Formula:
        out = self.identity_atom
        for symbol in rhs:
            part = self.letter_atoms.get(symbol)
            if part is None:
                part = env[symbol]
            out = fm.compose(out, part)
        return out

    def apply(self, x: str, env: dict[str, fm.Formula]) -> fm.Formula:
        parts = [self.eval_rhs(rhs, env) for rhs in self.rhs_of[x]]
        out = parts[0]
        combine = self.combiner[x]
        for part in parts[1:]:
            out = combine(out, part)
        return out


@dataclass
class Solution:
    """Least fixed point per non-terminal, with naive-round snapshots if kept."""

    system: EquationSystem
    final: dict[str, fm.Formula]
    snapshots: Optional[list[dict[str, fm.Formula]]]
    rounds: Optional[int]
    engine: str
    stats: SolveStats
    _naive_twin: Optional["Solution"] = field(default=None, repr=False)


def build_system(grammar: GameGrammar, nfa: Nfa) -> EquationSystem:
    return EquationSystem(grammar, nfa)


def _check_deadline(deadline: Optional[float]):
    if deadline is not None and time.monotonic() > deadline:
        raise SolveTimeout()


def kleene_naive(system: EquationSystem, deadline: Optional[float] = None) -> Solution:
    """Synchronous rounds from FALSE; keeps every round for strategy levels."""
    start = time.monotonic()
    nts = system.grammar.nonterminals
    current = {x: fm.FALSE for x in nts}
    snapshots = [dict(current)]
    boxes_seen: set[Box] = set()
    while True:
        _check_deadline(deadline)
        nxt = {x: system.apply(x, current) for x in nts}
        snapshots.append(dict(nxt))
        if all(fm.equivalent(nxt[x], current[x]) for x in nts):
            break
        for f in nxt.values():
            boxes_seen |= f.boxes()
        cap = len(nts) * (1 << len(boxes_seen))
        if len(snapshots) - 1 > cap:
            raise InternalInvariantError(
                f"kleene iteration ran {len(snapshots) - 1} rounds, beyond the "
                f"soft cap {cap} for {len(nts)} non-terminals and "
                f"{len(boxes_seen)} boxes"
            )
        current = nxt
    rounds = len(snapshots) - 1
    final = snapshots[-1]
    stats = SolveStats(
        engine="naive",
        rounds=rounds,
        updates=rounds * len(nts),
        clause_counts={x: len(final[x]) for x in nts},
        wall_ms=(time.monotonic() - start) * 1000.0,
    )
    return Solution(system, final, snapshots, rounds, "naive", stats)


def kleene_worklist(system: EquationSystem, deadline: Optional[float] = None) -> Solution:
    """Chaotic iteration: recompute only components whose dependencies changed."""
    start = time.monotonic()
    nts = system.grammar.nonterminals
    current = {x: fm.FALSE for x in nts}
    queue = deque(nts)
    queued = set(nts)
    updates = 0
    while queue:
        _check_deadline(deadline)
        x = queue.popleft()
        queued.discard(x)
        new = system.apply(x, current)
        updates += 1
        if not fm.equivalent(new, current[x]):
            current[x] = new
            for y in system.dependents[x]:
                if y not in queued:
                    queue.append(y)
                    queued.add(y)
    stats = SolveStats(
        engine="worklist",
        rounds=0,
        updates=updates,
        clause_counts={x: len(current[x]) for x in nts},
        wall_ms=(time.monotonic() - start) * 1000.0,
    )
    return Solution(system, current, None, None, "worklist", stats)


def ensure_snapshots(solution: Solution) -> Solution:
    """Round snapshots for strategy levels; reruns the naive engine once."""
    if solution.snapshots is not None:
        return solution
    if solution._naive_twin is None:
        twin = kleene_naive(solution.system)
        for x in solution.system.grammar.nonterminals:
            if not fm.equivalent(twin.final[x], solution.final[x]):
                raise InternalInvariantError(
                    f"worklist and naive finals disagree on {x}"
                )
        solution._naive_twin = twin
    return solution._naive_twin


def eval_sentential(solution: Solution, form: SententialForm) -> fm.Formula:
    """Compose the per-symbol formulas left to right; empty form gives identity."""
    system = solution.system
    out = system.identity_atom
    for symbol in form:
        part = system.letter_atoms.get(symbol)
        if part is None:
            if symbol not in solution.final:
                raise ValueError(f"unknown symbol {symbol!r}")
            part = solution.final[symbol]
        out = fm.compose(out, part)
    return out


def reject_pred(nfa: Nfa) -> Callable[[Box], bool]:
    return lambda box: box_rejecting(nfa, box)


def accept_pred(nfa: Nfa) -> Callable[[Box], bool]:
    return lambda box: not box_rejecting(nfa, box)


def refuter_wins(
    solution: Solution,
    form: SententialForm,
    pred: Optional[Callable[[Box], bool]] = None,
) -> bool:
    """Refuter forces a terminal word whose box satisfies the predicate."""
    if pred is None:
        pred = reject_pred(solution.system.nfa)
    return fm.is_rejecting(eval_sentential(solution, form), pred)


def prover_forces_infinite(solution: Solution, form: SententialForm) -> bool:
    """Prover can keep the play going forever (the emptiness game)."""
    return fm.is_false(eval_sentential(solution, form))


def approximant(solution: Solution, symbol: str, i: int) -> fm.Formula:
    """Round-i value of a symbol; terminals are their atom at every level."""
    system = solution.system
    part = system.letter_atoms.get(symbol)
    if part is not None:
        return part
    if symbol not in solution.final:
        raise ValueError(f"unknown symbol {symbol!r}")
    if solution.snapshots is None:
        raise ValueError("approximants need round snapshots (naive engine)")
    if not 0 <= i < len(solution.snapshots):
        raise ValueError(f"round {i} out of range 0..{len(solution.snapshots) - 1}")
    return solution.snapshots[i][symbol]


def box_entry_round(solution: Solution, x: str, box: Box) -> Optional[int]:
    """First naive round in which the box shows up in the non-terminal's value."""
    if solution.snapshots is None:
        raise ValueError("entry rounds need round snapshots (naive engine)")
    for i, snapshot in enumerate(solution.snapshots):
        if box in snapshot[x].boxes():
            return i
    return None
