"""Negation-free CNF over boxes, kept canonical as antichains of minimal clauses.

A formula is a set of clauses, each clause a set of boxes.  TRUE is the empty
clause set, FALSE is exactly {{}}.  Every operation returns the canonical
form, so logical equivalence of results is plain equality.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Mapping, Optional

from .automaton import Box, compose_box, identity_box


class Clause:
    """Sorted duplicate-free set of boxes; disjunction of its members."""

    __slots__ = ("boxes", "box_set", "key", "_hash")

    def __init__(self, boxes: Iterable[Box]):
        unique = set(boxes)
        ordered = tuple(sorted(unique, key=_box_key))
        object.__setattr__(self, "boxes", ordered)
        object.__setattr__(self, "box_set", frozenset(unique))
        object.__setattr__(self, "key", tuple(b.key for b in ordered))
        object.__setattr__(self, "_hash", hash(self.box_set))

    def __setattr__(self, name, value):
        raise AttributeError("Clause is immutable")

    def __len__(self) -> int:
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def __contains__(self, box: Box) -> bool:
        return box in self.box_set

    def issubset(self, other: "Clause") -> bool:
        return self.box_set <= other.box_set

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, Clause) and self.box_set == other.box_set

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "{" + ", ".join(repr(b) for b in self.boxes) + "}"


def _box_key(box: Box) -> tuple:
    return box.key


def _clause_key(clause: Clause) -> tuple:
    return clause.key


_CLAUSE_INTERN: dict[frozenset, Clause] = {}
_FORMULA_INTERN: dict[tuple, Formula] = {}


def _intern_clause(boxes) -> Clause:
    key = frozenset(boxes)
    clause = _CLAUSE_INTERN.get(key)
    if clause is None:
        clause = Clause(key)
        _CLAUSE_INTERN[key] = clause
    return clause


def _intern_formula(clauses: tuple) -> Formula:
    formula = _FORMULA_INTERN.get(clauses)
    if formula is None:
        formula = Formula(clauses)
        _FORMULA_INTERN[clauses] = formula
    return formula


class Formula:
    """Canonical CNF: sorted antichain of subset-minimal clauses."""

    __slots__ = ("clauses", "_hash")

    def __init__(self, clauses: tuple[Clause, ...]):
        # internal constructor; use normalize()/atom()/true_/false_ to build
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(self, "_hash", hash(clauses))

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, Formula) and self.clauses == other.clauses

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.clauses)

    def boxes(self) -> frozenset[Box]:
        out: set[Box] = set()
        for clause in self.clauses:
            out |= clause.box_set
        return frozenset(out)

    def __repr__(self) -> str:
        if not self.clauses:
            return "TRUE"
        if self.clauses == (Clause(()),):
            return "FALSE"
        return "CNF[" + " & ".join(repr(c) for c in self.clauses) + "]"


TRUE = Formula(())
FALSE = Formula((Clause(()),))
_FORMULA_INTERN[()] = TRUE
_FORMULA_INTERN[FALSE.clauses] = FALSE
_CLAUSE_INTERN[frozenset()] = FALSE.clauses[0]


def normalize(clause_sets: Iterable[Iterable[Box]]) -> Formula:
    """Drop duplicate and superset clauses, sort canonically."""
    clauses = {_intern_clause(bs) for bs in clause_sets}
    dims = {b.dim for c in clauses for b in c.boxes}
    if len(dims) > 1:
        raise ValueError(f"boxes of mixed dimensions in one formula: {sorted(dims)}")
    return _normalize_clauses(clauses)


def _normalize_clauses(clauses: Iterable[Clause]) -> Formula:
    by_size = sorted(clauses, key=lambda c: (len(c), c.key))
    kept: list[Clause] = []
    for clause in by_size:
        if not any(k.issubset(clause) for k in kept):
            kept.append(clause)
    kept.sort(key=_clause_key)
    return _intern_formula(tuple(kept))


def atom(box: Box) -> Formula:
    """The formula with the single clause {box}."""
    return _intern_formula((_intern_clause((box,)),))


def is_false(formula: Formula) -> bool:
    """Presence of the empty clause; canonically, equality with FALSE."""
    return any(len(c) == 0 for c in formula.clauses)


def is_true(formula: Formula) -> bool:
    return not formula.clauses


@lru_cache(maxsize=1 << 14)
def conj(f: Formula, g: Formula) -> Formula:
    """Conjunction is clause-set union."""
    if is_false(f) or is_false(g):
        return FALSE
    return _normalize_clauses(set(f.clauses) | set(g.clauses))


@lru_cache(maxsize=1 << 14)
def disj(f: Formula, g: Formula) -> Formula:
    """Disjunction is all pairwise clause unions."""
    if is_false(f):
        return g
    if is_false(g):
        return f
    return _normalize_clauses(
        {_intern_clause(k.box_set | h.box_set) for k in f.clauses for h in g.clauses}
    )


def _box_compose_clause(box: Box, clause: Clause) -> Clause:
    return _intern_clause(compose_box(box, tau) for tau in clause.boxes)


@lru_cache(maxsize=1 << 14)
def compose(f: Formula, g: Formula) -> Formula:
    """Relational composition lifted to CNF.

    Implemented per clause K of ``f`` as the disjunction of the formulas
    rho;g for rho in K, normalizing along the way; this equals the closed
    form that enumerates all maps from K into the clauses of ``g``.
    FALSE absorbs on either side.
    """
    if is_false(f) or is_false(g):
        return FALSE
    result_clauses: set[Clause] = set()
    for k in f.clauses:
        # disjunction-fold over {rho;g | rho in K}; empty K folds to FALSE
        acc: Optional[Formula] = None
        for rho in k.boxes:
            rho_g = _normalize_clauses(
                {_box_compose_clause(rho, h) for h in g.clauses}
            )
            acc = rho_g if acc is None else disj(acc, rho_g)
        if acc is None:
            acc = FALSE
        result_clauses.update(acc.clauses)
    return _normalize_clauses(result_clauses)


def implies(f: Formula, g: Formula) -> bool:
    """Monotone-CNF implication: every clause of g embeds a clause of f."""
    return all(
        any(k.issubset(h) for k in f.clauses) for h in g.clauses
    )


def equivalent(f: Formula, g: Formula) -> bool:
    """Canonical forms are equal exactly when the formulas are equivalent."""
    return f == g


def is_rejecting(formula: Formula, pred: Callable[[Box], bool]) -> bool:
    """CNF satisfaction under the assignment that sets pred-boxes to true."""
    return all(any(pred(b) for b in clause.boxes) for clause in formula.clauses)


class ChoiceFunction:
    """One box selected from each clause of a formula; refuter's memory."""

    __slots__ = ("formula", "picks")

    def __init__(self, formula: Formula, picks: tuple[Box, ...]):
        if len(picks) != len(formula.clauses):
            raise ValueError("one pick per clause required")
        for clause, box in zip(formula.clauses, picks):
            if box not in clause:
                raise ValueError("chosen box not in its clause")
        object.__setattr__(self, "formula", formula)
        object.__setattr__(self, "picks", picks)

    def __setattr__(self, name, value):
        raise AttributeError("ChoiceFunction is immutable")

    def __getitem__(self, clause: Clause) -> Box:
        return self.picks[self.formula.clauses.index(clause)]

    @property
    def image(self) -> frozenset[Box]:
        return frozenset(self.picks)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ChoiceFunction)
            and self.formula == other.formula
            and self.picks == other.picks
        )

    def __repr__(self) -> str:
        return f"ChoiceFunction(image={sorted(self.image, key=lambda b: b.key)!r})"


def pick_choice(
    formula: Formula,
    pred: Callable[[Box], bool],
    rank: Optional[Mapping[Box, int]] = None,
) -> Optional[ChoiceFunction]:
    """Choose a pred-satisfying box from each clause, if possible.

    Ties go to the lowest rank (when given; entry rounds from the solver),
    then to canonical box order.  FALSE has an unsatisfiable empty clause.
    """
    picks = []
    for clause in formula.clauses:
        candidates = [b for b in clause.boxes if pred(b)]
        if not candidates:
            return None
        if rank is None:
            picks.append(candidates[0])
        else:
            picks.append(min(candidates, key=lambda b: (rank.get(b, 1 << 30), b.key)))
    return ChoiceFunction(formula, tuple(picks))


def refine_choice(choice: ChoiceFunction, g: Formula) -> ChoiceFunction:
    """Carry a choice function along an implication.

    Requires choice.formula => g; each clause H of g is mapped to the first
    embedded clause K (canonical order) and inherits its chosen box.  The
    image can only shrink.
    """
    f = choice.formula
    picks = []
    for h in g.clauses:
        for k, box in zip(f.clauses, choice.picks):
            if k.issubset(h):
                picks.append(box)
                break
        else:
            raise ValueError("refine_choice requires implication to hold")
    return ChoiceFunction(g, tuple(picks))


def render_formula(formula: Formula, box_names: Mapping[Box, str]) -> list[list[str]]:
    """Clause list over stable box names, for debug output and the service."""
    return [[box_names[b] for b in clause.boxes] for clause in formula.clauses]


def name_boxes(boxes: Iterable[Box]) -> dict[Box, str]:
    """Stable names b0, b1, ... in canonical box order."""
    ordered = sorted(set(boxes), key=lambda b: b.key)
    return {b: f"b{i}" for i, b in enumerate(ordered)}


def identity_atom(dim: int) -> Formula:
    return atom(identity_box(dim))


def clear_caches():
    """Reset the operation memo tables (used for honest benchmark timing)."""
    conj.cache_clear()
    disj.cache_clear()
    compose.cache_clear()
