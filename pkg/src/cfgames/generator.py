"""Reproducible random instances: Tabakov-Vardi automata and adapted grammars.

All randomness comes from SplitMix64 so that (params, seed) determines the
instance bit for bit on every platform.  Automata draw, per letter, a fixed
number of distinct transition pairs; grammars draw rules of the shape
"optional terminal, optional non-terminal, optional terminal" per player,
then patch every ruleless non-terminal with an epsilon rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .automaton import Nfa
from .grammar import GameGrammar


class SplitMix64:
    """SplitMix64 (Steele, Lea, Flood 2014): state += golden gamma, mix twice.

    Chosen because the algorithm fits in five lines and reproduces exactly
    on any platform with 64-bit integer arithmetic.
    """

    MASK = (1 << 64) - 1
    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform in [0, bound); rejection sampling avoids modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def chance(self, probability: float) -> bool:
        """Bernoulli draw from the top 53 bits; always consumes one value."""
        u = (self.next_u64() >> 11) * 2.0**-53
        return u < probability

    def sample_distinct(self, population: int, count: int) -> list[int]:
        """Uniform subset of the given size, in draw order."""
        if count > population:
            raise ValueError("cannot sample more elements than the population")
        seen: set[int] = set()
        out: list[int] = []
        while len(out) < count:
            candidate = self.below(population)
            if candidate not in seen:
                seen.add(candidate)
                out.append(candidate)
        return out


def derive_seed(seed: int, *salts: int) -> int:
    """Independent child seed for a labeled sub-stream."""
    rng = SplitMix64(seed)
    out = rng.next_u64()
    for salt in salts:
        rng = SplitMix64(out ^ (salt & SplitMix64.MASK))
        out = rng.next_u64()
    return out


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class GenParams:
    """Knobs of the instance generator; defaults follow the dense regime."""

    states: int = 5
    letters: int = 5
    density: float = 2.0  # transitions per letter = round(density * states)
    final_fraction: float = 0.5
    refuter_nonterminals: int = 5
    prover_nonterminals: int = 5
    refuter_rules: int = 0  # 0 means twice the player's non-terminal count
    prover_rules: int = 0
    p_first_terminal: float = 0.8
    p_nonterminal: float = 0.8
    p_second_terminal: float = 0.8
    initial_final: bool = False  # force the initial state to be final

    def __post_init__(self):
        if self.states < 1 or self.letters < 1:
            raise ValueError("need at least one state and one letter")
        if not 0 <= self.density <= self.states:
            raise ValueError("density must lie in [0, states]")
        if not 0 <= self.final_fraction <= 1:
            raise ValueError("final fraction must lie in [0, 1]")
        if self.refuter_nonterminals < 1 or self.prover_nonterminals < 1:
            raise ValueError("each player needs at least one non-terminal")
        for p in (self.p_first_terminal, self.p_nonterminal, self.p_second_terminal):
            if not 0 <= p <= 1:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.refuter_rules == 0:
            self.refuter_rules = 2 * self.refuter_nonterminals
        if self.prover_rules == 0:
            self.prover_rules = 2 * self.prover_nonterminals

    def letter_names(self) -> list[str]:
        if self.letters <= 26:
            return [chr(ord("a") + i) for i in range(self.letters)]
        return [f"a{i}" for i in range(self.letters)]

    def describe(self) -> str:
        return (
            f"states={self.states} letters={self.letters} density={self.density} "
            f"final_fraction={self.final_fraction} "
            f"nonterminals={self.refuter_nonterminals}+{self.prover_nonterminals} "
            f"rules={self.refuter_rules}+{self.prover_rules} "
            f"p=({self.p_first_terminal},{self.p_nonterminal},{self.p_second_terminal}) "
            f"initial_final={self.initial_final}"
        )


def gen_nfa(params: GenParams, seed: int) -> Nfa:
    """Tabakov-Vardi draw: per letter, round(density*n) distinct pairs;
    round(final_fraction*n) final states, at least one when the fraction
    is positive."""
    rng = SplitMix64(seed)
    n = params.states
    letters = params.letter_names()
    per_letter = _round_half_up(params.density * n)
    transitions = []
    for a in letters:
        for code in rng.sample_distinct(n * n, per_letter):
            transitions.append((code // n, a, code % n))
    final_count = _round_half_up(params.final_fraction * n)
    if params.final_fraction > 0:
        final_count = max(1, final_count)
    if params.initial_final:
        finals = [0]
        if final_count > 1:
            finals += [q + 1 for q in rng.sample_distinct(n - 1, final_count - 1)]
    else:
        finals = rng.sample_distinct(n, final_count) if final_count else []
    return Nfa(
        names=[f"q{i}" for i in range(n)],
        alphabet=letters,
        initial=0,
        finals=finals,
        transitions=transitions,
    )


def gen_grammar(params: GenParams, seed: int) -> GameGrammar:
    """Rules of the shape (terminal?, non-terminal?, terminal?) per player.

    The left-hand side is uniform over the acting player's non-terminals;
    the optional middle non-terminal is uniform over all of them.  Any
    non-terminal left without a rule afterwards gets an epsilon rule.
    """
    rng = SplitMix64(seed)
    letters = params.letter_names()
    refuter_nts = [f"X{i}" for i in range(params.refuter_nonterminals)]
    prover_nts = [f"Y{i}" for i in range(params.prover_nonterminals)]
    all_nts = refuter_nts + prover_nts
    rules: list[tuple[str, tuple[str, ...]]] = []
    for own_nts, count in (
        (refuter_nts, params.refuter_rules),
        (prover_nts, params.prover_rules),
    ):
        for _ in range(count):
            lhs = own_nts[rng.below(len(own_nts))]
            rhs: list[str] = []
            if rng.chance(params.p_first_terminal):
                rhs.append(letters[rng.below(len(letters))])
            if rng.chance(params.p_nonterminal):
                rhs.append(all_nts[rng.below(len(all_nts))])
            if rng.chance(params.p_second_terminal):
                rhs.append(letters[rng.below(len(letters))])
            rules.append((lhs, tuple(rhs)))
    with_rules = {lhs for lhs, _ in rules}
    for x in all_nts:
        if x not in with_rules:
            rules.append((x, ()))
    return GameGrammar(refuter_nts, prover_nts, letters, rules)


@dataclass
class GeneratedInstance:
    nfa: Nfa
    grammar: GameGrammar
    start: tuple[str, ...]
    params: GenParams
    seed: int
    header: list[str] = field(default_factory=list)


def gen_instance(params: GenParams, seed: int) -> GeneratedInstance:
    """NFA and grammar from labeled sub-seeds; start symbol is X0."""
    nfa = gen_nfa(params, derive_seed(seed, 1))
    grammar = gen_grammar(params, derive_seed(seed, 2))
    header = [
        "random inclusion-game instance (Tabakov-Vardi style)",
        f"params: {params.describe()}",
        f"seed: {seed}",
    ]
    return GeneratedInstance(nfa, grammar, ("X0",), params, seed, header)
