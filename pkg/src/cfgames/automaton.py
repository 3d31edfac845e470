"""NFAs, the transition monoid of boxes, and the subset-construction baseline.

A box is a relation over the states of an NFA, recording the state changes
some set of words induces.  Boxes are the atoms of the CNF formulas the
solver computes; they compose like procedure summaries.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator


class Box:
    """Boolean relation over the states of an automaton with ``dim`` states.

    Stored as one bitmask per source state (bit ``t`` of ``rows[s]`` set iff
    the pair ``(s, t)`` is in the relation).  Immutable and totally ordered
    by the row-major matrix entries, so sets of boxes have a canonical sort.
    """

    __slots__ = ("dim", "rows", "key", "_hash")

    def __init__(self, dim: int, rows: Iterable[int]):
        if dim < 1:
            raise ValueError("box dimension must be >= 1")
        rows = tuple(rows)
        if len(rows) != dim:
            raise ValueError(f"expected {dim} rows, got {len(rows)}")
        full = (1 << dim) - 1
        if any(r < 0 or r > full for r in rows):
            raise ValueError("row bitmask out of range")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rows", rows)
        # row-major lexicographic key: entry (0, 0) is most significant
        key = (dim,) + tuple(_reverse_bits(r, dim) for r in rows)
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "_hash", hash((dim, rows)))

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    def contains(self, source: int, target: int) -> bool:
        return bool(self.rows[source] >> target & 1)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for s, row in enumerate(self.rows):
            t = 0
            while row:
                if row & 1:
                    yield (s, t)
                row >>= 1
                t += 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Box) and self.dim == other.dim and self.rows == other.rows
        )

    def __lt__(self, other: "Box") -> bool:
        return self.key < other.key

    def __le__(self, other: "Box") -> bool:
        return self.key <= other.key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Box({self.dim}, {sorted(self.pairs())})"


@lru_cache(maxsize=1 << 12)
def _reverse_bits(value: int, width: int) -> int:
    out = 0
    for i in range(width):
        out = (out << 1) | (value >> i & 1)
    return out


_BOX_INTERN: dict[tuple[int, ...], Box] = {}


def _intern_box(dim: int, rows: tuple[int, ...]) -> Box:
    box = _BOX_INTERN.get(rows)
    if box is None or box.dim != dim:
        box = Box(dim, rows)
        _BOX_INTERN[rows] = box
    return box


def identity_box(dim: int) -> Box:
    """The diagonal relation; neutral element of composition."""
    return _intern_box(dim, tuple(1 << q for q in range(dim)))


def empty_box(dim: int) -> Box:
    """The empty relation (a perfectly ordinary box, never special-cased)."""
    return _intern_box(dim, (0,) * dim)


def box_from_pairs(dim: int, pairs: Iterable[tuple[int, int]]) -> Box:
    rows = [0] * dim
    for s, t in pairs:
        rows[s] |= 1 << t
    return _intern_box(dim, tuple(rows))


@lru_cache(maxsize=1 << 16)
def _compose_rows(rows_a: tuple[int, ...], rows_b: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for row in rows_a:
        acc = 0
        mid = 0
        while row:
            if row & 1:
                acc |= rows_b[mid]
            row >>= 1
            mid += 1
        out.append(acc)
    return tuple(out)


def compose_box(rho: Box, tau: Box) -> Box:
    """Relational composition: pairs (q, q'') with a middle state in both."""
    if rho.dim != tau.dim:
        raise ValueError(f"box dimension mismatch: {rho.dim} vs {tau.dim}")
    return _intern_box(rho.dim, _compose_rows(rho.rows, tau.rows))


class Nfa:
    """Non-deterministic finite automaton with a single initial state.

    States are indexed; ``names`` keeps the display names.  Immutable after
    construction, so instances can be shared freely.
    """

    def __init__(
        self,
        names: Iterable[str],
        alphabet: Iterable[str],
        initial: int,
        finals: Iterable[int],
        transitions: Iterable[tuple[int, str, int]],
    ):
        self.names = tuple(names)
        self.alphabet = tuple(alphabet)
        self.initial = initial
        self.finals = frozenset(finals)
        self.transitions = tuple(sorted(set(transitions), key=self._trans_key))
        self._validate()
        self.finals_mask = 0
        for q in self.finals:
            self.finals_mask |= 1 << q
        # per-letter successor bitmasks, the generators of the monoid
        self._letter_rows: dict[str, tuple[int, ...]] = {}
        for a in self.alphabet:
            rows = [0] * len(self.names)
            for s, letter, t in self.transitions:
                if letter == a:
                    rows[s] |= 1 << t
            self._letter_rows[a] = tuple(rows)

    def _trans_key(self, trans: tuple[int, str, int]):
        s, a, t = trans
        return (s, self.alphabet.index(a) if a in self.alphabet else -1, t)

    def _validate(self):
        n = len(self.names)
        if n < 1:
            raise ValueError("automaton needs at least one state")
        if len(set(self.names)) != n:
            raise ValueError("duplicate state names")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("duplicate letters")
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        bad = [q for q in self.finals if not 0 <= q < n]
        if bad:
            raise ValueError(f"final states out of range: {bad}")
        letters = set(self.alphabet)
        for s, a, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"transition endpoint out of range: {(s, a, t)}")
            if a not in letters:
                raise ValueError(f"transition letter not in alphabet: {a!r}")

    @property
    def n_states(self) -> int:
        return len(self.names)

    def post(self, subset: frozenset[int], letter: str) -> frozenset[int]:
        rows = self._letter_rows[letter]
        mask = 0
        for q in subset:
            mask |= rows[q]
        return frozenset(q for q in range(self.n_states) if mask >> q & 1)

    def accepts(self, word: Iterable[str]) -> bool:
        """Subset simulation; the membership oracle used throughout the tests."""
        current = 1 << self.initial
        for a in word:
            rows = self._letter_rows[a]
            nxt = 0
            q = 0
            while current:
                if current & 1:
                    nxt |= rows[q]
                current >>= 1
                q += 1
            current = nxt
        return bool(current & self.finals_mask)

    def is_deterministic(self) -> bool:
        seen = set()
        for s, a, _ in self.transitions:
            if (s, a) in seen:
                return False
            seen.add((s, a))
        return True

    def is_complete(self) -> bool:
        seen = {(s, a) for s, a, _ in self.transitions}
        return all(
            (q, a) in seen for q in range(self.n_states) for a in self.alphabet
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Nfa)
            and self.names == other.names
            and self.alphabet == other.alphabet
            and self.initial == other.initial
            and self.finals == other.finals
            and self.transitions == other.transitions
        )

    def __repr__(self) -> str:
        return (
            f"Nfa(states={len(self.names)}, alphabet={self.alphabet!r}, "
            f"initial={self.initial}, finals={sorted(self.finals)}, "
            f"transitions={len(self.transitions)})"
        )


def letter_box(nfa: Nfa, a: str) -> Box:
    """The box of a single letter: all pairs (q, q') with q -a-> q'."""
    if a not in nfa._letter_rows:
        raise ValueError(f"unknown letter {a!r}")
    return _intern_box(nfa.n_states, nfa._letter_rows[a])


def word_box(nfa: Nfa, word: Iterable[str]) -> Box:
    """Fold of composition over letter boxes; the empty word gives identity."""
    box = identity_box(nfa.n_states)
    for a in word:
        box = compose_box(box, letter_box(nfa, a))
    return box


def box_rejecting(nfa: Nfa, box: Box) -> bool:
    """True iff the box has no pair (initial, final): its words avoid L(A)."""
    if box.dim != nfa.n_states:
        raise ValueError("box dimension does not match automaton")
    return not (box.rows[nfa.initial] & nfa.finals_mask)


def box_accepting(nfa: Nfa, box: Box) -> bool:
    """Negation of the reject predicate: some pair (initial, final) present."""
    return not box_rejecting(nfa, box)


def monoid_closure(nfa: Nfa) -> tuple[Box, ...]:
    """All boxes generated by the letters: identity plus compositions.

    Worklist closure; the result is exactly the image of the word-to-box map.
    """
    ident = identity_box(nfa.n_states)
    found = {ident}
    queue = [ident]
    generators = [letter_box(nfa, a) for a in nfa.alphabet]
    for g in generators:
        if g not in found:
            found.add(g)
            queue.append(g)
    while queue:
        box = queue.pop()
        for g in generators:
            composed = compose_box(box, g)
            if composed not in found:
                found.add(composed)
                queue.append(composed)
    return tuple(sorted(found, key=lambda b: b.key))


def determinize(nfa: Nfa) -> Nfa:
    """Reachable subset construction; complete, with an explicit empty sink."""
    start = frozenset({nfa.initial})
    index: dict[frozenset[int], int] = {start: 0}
    order = [start]
    transitions = []
    pos = 0
    while pos < len(order):
        subset = order[pos]
        for a in nfa.alphabet:
            target = nfa.post(subset, a)
            if target not in index:
                index[target] = len(order)
                order.append(target)
            transitions.append((index[subset], a, index[target]))
        pos += 1

    def name_of(subset: frozenset[int]) -> str:
        return "{" + ",".join(nfa.names[q] for q in sorted(subset)) + "}"

    finals = [i for i, subset in enumerate(order) if subset & nfa.finals]
    return Nfa(
        names=[name_of(s) for s in order],
        alphabet=nfa.alphabet,
        initial=0,
        finals=finals,
        transitions=transitions,
    )


def minimize(dfa: Nfa) -> Nfa:
    """Partition refinement on a complete DFA; language-equivalent minimum."""
    if not dfa.is_deterministic():
        raise ValueError("minimize requires a deterministic automaton")
    if not dfa.is_complete():
        raise ValueError("minimize requires a complete automaton")
    delta = {(s, a): t for s, a, t in dfa.transitions}

    reachable = {dfa.initial}
    frontier = [dfa.initial]
    while frontier:
        q = frontier.pop()
        for a in dfa.alphabet:
            t = delta[(q, a)]
            if t not in reachable:
                reachable.add(t)
                frontier.append(t)

    block = {q: (q in dfa.finals) for q in reachable}
    while True:
        signature = {
            q: (block[q],) + tuple(block[delta[(q, a)]] for a in dfa.alphabet)
            for q in reachable
        }
        labels = {}
        new_block = {}
        for q in sorted(reachable):
            sig = signature[q]
            if sig not in labels:
                labels[sig] = len(labels)
            new_block[q] = labels[sig]
        if len(set(new_block.values())) == len(set(block.values())):
            block = new_block
            break
        block = new_block

    classes: dict[int, list[int]] = {}
    for q in sorted(reachable):
        classes.setdefault(block[q], []).append(q)
    ordered = sorted(classes.values(), key=lambda members: members[0])
    class_index = {}
    for i, members in enumerate(ordered):
        for q in members:
            class_index[q] = i
    transitions = []
    for i, members in enumerate(ordered):
        rep = members[0]
        for a in dfa.alphabet:
            transitions.append((i, a, class_index[delta[(rep, a)]]))
    finals = [i for i, members in enumerate(ordered) if members[0] in dfa.finals]
    return Nfa(
        names=[dfa.names[members[0]] for members in ordered],
        alphabet=dfa.alphabet,
        initial=class_index[dfa.initial],
        finals=finals,
        transitions=transitions,
    )
