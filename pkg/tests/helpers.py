"""Shared test utilities: random values and independent oracles.

The oracles here deliberately avoid the library's own code paths: formulas
are checked by truth tables, composition by the recursive definition on
formula trees, emptiness by an attractor over non-terminals, and automata
by direct word simulation.
"""

from __future__ import annotations

import random

from cfgames import formula as fm
from cfgames.automaton import Box, box_from_pairs, compose_box
from cfgames.grammar import GameGrammar, PROVER, REFUTER


def rand_box(rng: random.Random, dim: int) -> Box:
    pairs = [
        (s, t) for s in range(dim) for t in range(dim) if rng.random() < 0.4
    ]
    return box_from_pairs(dim, pairs)


def rand_formula(
    rng: random.Random, dim: int, max_clauses: int = 3, max_boxes: int = 3
) -> fm.Formula:
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        clauses.append({rand_box(rng, dim) for _ in range(rng.randint(1, max_boxes))})
    return fm.normalize(clauses)


# ---------------------------------------------------------------------------
# truth-table oracle for CNF semantics


def eval_cnf(formula: fm.Formula, true_boxes: set[Box]) -> bool:
    return all(
        any(b in true_boxes for b in clause.boxes) for clause in formula.clauses
    )


def all_assignments(boxes: list[Box]):
    for mask in range(1 << len(boxes)):
        yield {b for i, b in enumerate(boxes) if mask >> i & 1}


def semantically_equal(f: fm.Formula, g: fm.Formula) -> bool:
    boxes = sorted(f.boxes() | g.boxes(), key=lambda b: b.key)
    return all(
        eval_cnf(f, nu) == eval_cnf(g, nu) for nu in all_assignments(boxes)
    )


def semantically_implies(f: fm.Formula, g: fm.Formula) -> bool:
    boxes = sorted(f.boxes() | g.boxes(), key=lambda b: b.key)
    return all(
        (not eval_cnf(f, nu)) or eval_cnf(g, nu) for nu in all_assignments(boxes)
    )


# ---------------------------------------------------------------------------
# recursive composition on formula trees, the oracle for the closed form

FALSE_TREE = "false"


def cnf_to_tree(formula: fm.Formula):
    """CNF as a nested and/or tree with boxes at the leaves."""
    if fm.is_false(formula):
        return FALSE_TREE
    conjuncts = []
    for clause in formula.clauses:
        node = clause.boxes[0]
        for b in clause.boxes[1:]:
            node = ("or", node, b)
        conjuncts.append(node)
    tree = conjuncts[0]
    for c in conjuncts[1:]:
        tree = ("and", tree, c)
    return tree


def tree_compose(f, g):
    """Composition by the recursive definition: distribute from the left,
    then from the right, compose boxes at the leaves; FALSE absorbs."""
    if f == FALSE_TREE or g == FALSE_TREE:
        return FALSE_TREE
    if isinstance(f, tuple):
        op, left, right = f
        return (op, tree_compose(left, g), tree_compose(right, g))
    if isinstance(g, tuple):
        op, left, right = g
        return (op, tree_compose(f, left), tree_compose(f, right))
    return compose_box(f, g)


def eval_tree(tree, true_boxes: set[Box]) -> bool:
    if tree == FALSE_TREE:
        return False
    if isinstance(tree, tuple):
        op, left, right = tree
        if op == "and":
            return eval_tree(left, true_boxes) and eval_tree(right, true_boxes)
        return eval_tree(left, true_boxes) or eval_tree(right, true_boxes)
    return tree in true_boxes


def tree_boxes(tree) -> set[Box]:
    if tree == FALSE_TREE:
        return set()
    if isinstance(tree, tuple):
        return tree_boxes(tree[1]) | tree_boxes(tree[2])
    return {tree}


# ---------------------------------------------------------------------------
# attractor oracle for the emptiness game


def attractor_finite_forcers(grammar: GameGrammar) -> set[str]:
    """Non-terminals from which refuter forces derivation of a terminal word.

    AND-OR reachability over non-terminals only: a right-hand side is good
    once all its non-terminals are; refuter needs one good rule, prover
    concedes only when all rules are good.
    """
    good: set[str] = set()
    changed = True
    while changed:
        changed = False
        for x in grammar.nonterminals:
            if x in good:
                continue
            def rhs_good(rhs):
                return all(
                    s in good for s in rhs if grammar.is_nonterminal(s)
                )
            rules = grammar.rules_for[x]
            if grammar.owner[x] == REFUTER:
                ok = any(rhs_good(r.rhs) for r in rules)
            else:
                ok = all(rhs_good(r.rhs) for r in rules)
            if ok:
                good.add(x)
                changed = True
    return good


def rand_word(rng: random.Random, alphabet, max_len: int = 8) -> tuple[str, ...]:
    return tuple(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))
