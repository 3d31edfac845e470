"""Context-free grammars with ownership partitioning and the left-derivation arena.

Sentential forms are plain tuples of symbol names.  The leftmost non-terminal
determines whose turn it is; terminal words belong to the refuter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

REFUTER = "refuter"
PROVER = "prover"

EPSILON_TOKEN = "_eps_"

SententialForm = tuple[str, ...]


@dataclass(frozen=True)
class Rule:
    index: int
    lhs: str
    rhs: SententialForm

    def render(self) -> str:
        rhs = " ".join(self.rhs) if self.rhs else EPSILON_TOKEN
        return f"{self.lhs} -> {rhs}"


class GameGrammar:
    """CFG whose non-terminals are split between refuter and prover.

    Rules carry stable indices (file order); every deterministic tie-break in
    the solver and the strategies uses the lowest index.
    """

    def __init__(
        self,
        refuter_nonterminals: Iterable[str],
        prover_nonterminals: Iterable[str],
        terminals: Iterable[str],
        rules: Iterable[tuple[str, Iterable[str]]],
    ):
        refuter_nts = tuple(refuter_nonterminals)
        prover_nts = tuple(prover_nonterminals)
        self.nonterminals = refuter_nts + prover_nts
        self.terminals = tuple(terminals)
        self.owner = {x: REFUTER for x in refuter_nts}
        self.owner.update({x: PROVER for x in prover_nts})
        self.rules = tuple(
            Rule(i, lhs, tuple(rhs)) for i, (lhs, rhs) in enumerate(rules)
        )
        self.rules_for: dict[str, tuple[Rule, ...]] = {
            x: tuple(r for r in self.rules if r.lhs == x) for x in self.nonterminals
        }
        self._nts = frozenset(self.nonterminals)
        self._ts = frozenset(self.terminals)

    def is_nonterminal(self, symbol: str) -> bool:
        return symbol in self._nts

    def is_terminal(self, symbol: str) -> bool:
        return symbol in self._ts

    def render_form(self, form: SententialForm) -> str:
        """Compact join when unambiguous, else space-separated tokens."""
        if form == ():
            return EPSILON_TOKEN
        if all(len(s) == 1 for s in self.nonterminals + self.terminals):
            return "".join(form)
        return " ".join(form)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GameGrammar)
            and self.nonterminals == other.nonterminals
            and self.terminals == other.terminals
            and self.owner == other.owner
            and self.rules == other.rules
        )

    def __repr__(self) -> str:
        return (
            f"GameGrammar(nonterminals={self.nonterminals!r}, "
            f"terminals={self.terminals!r}, rules={len(self.rules)})"
        )


def validate(grammar: GameGrammar) -> list[str]:
    """All invariant violations as messages; empty list means well-formed."""
    violations = []
    names = set(grammar.nonterminals)
    if len(names) != len(grammar.nonterminals):
        violations.append("duplicate non-terminal declarations")
    overlap = names & set(grammar.terminals)
    if overlap:
        violations.append(f"symbols declared both terminal and non-terminal: {sorted(overlap)}")
    for x in grammar.nonterminals:
        if not grammar.rules_for.get(x):
            violations.append(f"non-terminal {x} has no rule")
    for rule in grammar.rules:
        if rule.lhs not in names:
            violations.append(f"rule {rule.index}: undeclared left-hand side {rule.lhs}")
        for symbol in rule.rhs:
            if symbol not in names and symbol not in grammar._ts:
                violations.append(f"rule {rule.index}: undeclared symbol {symbol}")
    return violations


def leftmost_split(
    grammar: GameGrammar, form: SententialForm
) -> Optional[tuple[SententialForm, str, SententialForm]]:
    """Split wXb into (w, X, b) at the leftmost non-terminal; None for words."""
    for i, symbol in enumerate(form):
        if grammar.is_nonterminal(symbol):
            return form[:i], symbol, form[i + 1 :]
    return None


def owner_of(grammar: GameGrammar, form: SententialForm) -> str:
    split = leftmost_split(grammar, form)
    if split is None:
        return REFUTER
    return grammar.owner[split[1]]


def derive(grammar: GameGrammar, form: SententialForm, rule_index: int) -> SententialForm:
    """Replace the leftmost non-terminal using the rule with the given index."""
    if not 0 <= rule_index < len(grammar.rules):
        raise ValueError(f"no rule with index {rule_index}")
    rule = grammar.rules[rule_index]
    split = leftmost_split(grammar, form)
    if split is None:
        raise ValueError("cannot derive from a terminal word")
    prefix, head, suffix = split
    if rule.lhs != head:
        raise ValueError(f"rule {rule_index} rewrites {rule.lhs}, leftmost is {head}")
    return prefix + rule.rhs + suffix


def legal_rules(grammar: GameGrammar, form: SententialForm) -> tuple[Rule, ...]:
    split = leftmost_split(grammar, form)
    if split is None:
        return ()
    return grammar.rules_for[split[1]]
