"""Strategy synthesis and the play engine.

Prover plays positionally: keep the position's formula non-rejecting.
Refuter plays with finite memory: a choice function over the current
level-indexed formula whose image only ever shrinks; every conforming play
bottoms out in a terminal word drawn from the initial image.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from . import formula as fm
from .automaton import (
    Box,
    box_rejecting,
    compose_box,
    identity_box,
    letter_box,
    word_box,
)
from .errors import BudgetExceededError, InternalInvariantError
from .grammar import (
    PROVER,
    REFUTER,
    GameGrammar,
    Rule,
    SententialForm,
    leftmost_split,
    owner_of,
)
from .solver import (
    Solution,
    approximant,
    ensure_snapshots,
    eval_sentential,
    prover_forces_infinite,
    reject_pred,
)


def level_formula(
    solution: Solution, form: SententialForm, levels: tuple[int, ...]
) -> fm.Formula:
    """Compose per-symbol approximants; terminals ignore their level entry."""
    if len(levels) != len(form):
        raise ValueError("one level per symbol required")
    solution = ensure_snapshots(solution)
    out = solution.system.identity_atom
    for symbol, lvl in zip(form, levels):
        out = fm.compose(out, approximant(solution, symbol, lvl))
    return out


# ---------------------------------------------------------------------------
# prover: positional strategy on triples


@dataclass(frozen=True)
class PositionTriple:
    """(box of the terminal prefix, leftmost non-terminal, formula of the rest)."""

    prefix_box: Box
    head: str
    suffix_formula: fm.Formula
    form: SententialForm

    @staticmethod
    def from_form(solution: Solution, form: SententialForm) -> "PositionTriple":
        split = leftmost_split(solution.system.grammar, form)
        if split is None:
            raise ValueError("terminal words have no decision triple")
        prefix, head, suffix = split
        return PositionTriple(
            prefix_box=word_box(solution.system.nfa, prefix),
            head=head,
            suffix_formula=eval_sentential(solution, suffix),
            form=form,
        )


def _rule_formulas(solution: Solution) -> dict[int, fm.Formula]:
    cache = getattr(solution, "_rule_formula_cache", None)
    if cache is None:
        cache = {
            rule.index: eval_sentential(solution, rule.rhs)
            for rule in solution.system.grammar.rules
        }
        solution._rule_formula_cache = cache
    return cache


def prover_move_on_triple(solution: Solution, triple: PositionTriple) -> int:
    grammar = solution.system.grammar
    if grammar.owner[triple.head] != PROVER:
        raise ValueError(f"{triple.head} is not prover-owned")
    pred = reject_pred(solution.system.nfa)
    prefix_atom = fm.atom(triple.prefix_box)
    here = fm.compose(
        prefix_atom, fm.compose(solution.final[triple.head], triple.suffix_formula)
    )
    if fm.is_rejecting(here, pred):
        raise ValueError("position is already lost for prover")
    rules = _rule_formulas(solution)
    for rule in grammar.rules_for[triple.head]:
        after = fm.compose(
            prefix_atom, fm.compose(rules[rule.index], triple.suffix_formula)
        )
        if not fm.is_rejecting(after, pred):
            return rule.index
    raise InternalInvariantError(
        "no safe rule at a non-rejecting prover position"
    )


def prover_move(solution: Solution, form: SententialForm) -> int:
    """Lowest-index rule keeping the position's formula non-rejecting."""
    return prover_move_on_triple(solution, PositionTriple.from_form(solution, form))


# ---------------------------------------------------------------------------
# refuter: finite-memory strategy via choice-function refinement


@dataclass(frozen=True)
class RefuterStrategyState:
    """Current form, one level per symbol, and the refined choice function."""

    form: SententialForm
    levels: tuple[int, ...]
    choice: fm.ChoiceFunction

    @property
    def image(self) -> frozenset[Box]:
        return self.choice.image


def _levels_for(grammar: GameGrammar, form: SententialForm, nt_level: int) -> tuple[int, ...]:
    return tuple(nt_level if grammar.is_nonterminal(s) else 0 for s in form)


def _entry_rank(solution: Solution, form: SententialForm) -> dict[Box, int]:
    """First round each box shows up in the form's approximant chain."""
    rank: dict[Box, int] = {}
    grammar = solution.system.grammar
    for i in range(len(solution.snapshots)):
        levels = _levels_for(grammar, form, i)
        for box in level_formula(solution, form, levels).boxes():
            rank.setdefault(box, i)
    return rank


def refuter_init(
    solution: Solution,
    form: SententialForm,
    pred: Optional[Callable[[Box], bool]] = None,
) -> RefuterStrategyState:
    """Choice function on the position's formula, preferring early boxes."""
    solution = ensure_snapshots(solution)
    if pred is None:
        pred = reject_pred(solution.system.nfa)
    top = eval_sentential(solution, form)
    choice = fm.pick_choice(top, pred, rank=_entry_rank(solution, form))
    if choice is None:
        raise ValueError("position is not winning for refuter")
    grammar = solution.system.grammar
    levels = _levels_for(grammar, form, solution.rounds)
    return RefuterStrategyState(form, levels, choice)


def _refine_at(
    solution: Solution,
    image: frozenset[Box],
    form: SententialForm,
    levels: tuple[int, ...],
) -> Optional[RefuterStrategyState]:
    target = level_formula(solution, form, levels)
    choice = fm.pick_choice(target, lambda b: b in image)
    if choice is None:
        return None
    return RefuterStrategyState(form, levels, choice)


def _splice_levels(
    grammar: GameGrammar,
    form: SententialForm,
    levels: tuple[int, ...],
    at: int,
    rhs: SententialForm,
    rhs_level: int,
) -> tuple[SententialForm, tuple[int, ...]]:
    new_form = form[:at] + rhs + form[at + 1 :]
    rhs_levels = tuple(
        rhs_level if grammar.is_nonterminal(s) else 0 for s in rhs
    )
    return new_form, levels[:at] + rhs_levels + levels[at + 1 :]


def refuter_move(
    state: RefuterStrategyState, solution: Solution
) -> tuple[int, RefuterStrategyState]:
    """Smallest level, then lowest rule, that lets the choice image survive."""
    solution = ensure_snapshots(solution)
    grammar = solution.system.grammar
    split = leftmost_split(grammar, state.form)
    if split is None:
        raise ValueError("terminal word: no move to make")
    prefix, head, _ = split
    if grammar.owner[head] != REFUTER:
        raise ValueError(f"{head} is not refuter-owned")
    at = len(prefix)
    level = state.levels[at]
    if level == 0:
        raise InternalInvariantError("refuter non-terminal at level zero")
    for j in range(level):
        for rule in grammar.rules_for[head]:
            new_form, new_levels = _splice_levels(
                grammar, state.form, state.levels, at, rule.rhs, j
            )
            refined = _refine_at(solution, state.image, new_form, new_levels)
            if refined is not None:
                if not refined.image <= state.image:
                    raise InternalInvariantError("choice image grew on refinement")
                return rule.index, refined
    raise InternalInvariantError(
        f"no refinement below level {level} at {state.form}"
    )


def refuter_observe(
    state: RefuterStrategyState, solution: Solution, rule_index: int
) -> RefuterStrategyState:
    """Refine along the prover's move; guaranteed to succeed one level down."""
    solution = ensure_snapshots(solution)
    grammar = solution.system.grammar
    split = leftmost_split(grammar, state.form)
    if split is None:
        raise ValueError("terminal word: nothing to observe")
    prefix, head, _ = split
    if grammar.owner[head] != PROVER:
        raise ValueError(f"{head} is not prover-owned")
    rule = grammar.rules[rule_index]
    if rule.lhs != head:
        raise ValueError(f"rule {rule_index} does not rewrite {head}")
    at = len(prefix)
    level = state.levels[at]
    if level == 0:
        raise InternalInvariantError("prover non-terminal at level zero")
    new_form, new_levels = _splice_levels(
        grammar, state.form, state.levels, at, rule.rhs, level - 1
    )
    refined = _refine_at(solution, state.image, new_form, new_levels)
    if refined is None:
        raise InternalInvariantError(
            f"no refinement after prover move {rule_index} at {state.form}"
        )
    if not refined.image <= state.image:
        raise InternalInvariantError("choice image grew on refinement")
    return refined


# ---------------------------------------------------------------------------
# play engine


class PlayView:
    """What an agent sees at one position: triple parts plus legal rules.

    The scalar fields (prefix box, head, suffix formula, legal rules) are
    snapshots; ``form``/``prefix``/``rest`` read the live game state and are
    only meaningful before the next move is applied.  Keeping them lazy
    makes steps O(1) even when forms grow along a capped play.
    """

    def __init__(self, state: "GameState"):
        self._state = state
        self.solution = state.solution
        self.prefix_box = state.prefix_box
        if state.stack:
            self.head: Optional[str] = state.stack[0][0]
            self.suffix_formula = state.stack[0][1]
            self.legal: tuple[Rule, ...] = state.grammar.rules_for[self.head]
        else:
            self.head = None
            self.suffix_formula = state.system.identity_atom
            self.legal = ()
        self._position_formula: Optional[fm.Formula] = None

    @property
    def prefix(self) -> SententialForm:
        return tuple(self._state.prefix)

    @property
    def rest(self) -> SententialForm:
        return tuple(s for s, _ in self._state.stack)

    @property
    def form(self) -> SententialForm:
        return self.prefix + self.rest

    @property
    def triple(self) -> PositionTriple:
        return PositionTriple(self.prefix_box, self.head, self.suffix_formula, self.form)

    @property
    def position_formula(self) -> fm.Formula:
        if self._position_formula is None:
            out = fm.atom(self.prefix_box)
            if self.head is not None:
                head_formula = self.solution.final[self.head]
                out = fm.compose(out, fm.compose(head_formula, self.suffix_formula))
            self._position_formula = out
        return self._position_formula


class GameState:
    """Incremental position: terminal prefix as a box, suffix as a formula stack.

    The stack keeps, for every remaining symbol, the formula of everything
    after it, so triples and position formulas cost O(1) compositions per
    step even on long plays.
    """

    def __init__(self, solution: Solution, start: SententialForm):
        self.solution = solution
        self.system = solution.system
        self.grammar = self.system.grammar
        self.nfa = self.system.nfa
        self.prefix: list[str] = []
        self.prefix_box = identity_box(self.nfa.n_states)
        self._letter_box = {a: letter_box(self.nfa, a) for a in self.nfa.alphabet}
        self._symbol_part = dict(self.system.letter_atoms)
        self._symbol_part.update(solution.final)
        self.stack: deque[tuple[str, fm.Formula]] = deque()
        tail = self.system.identity_atom
        entries = []
        for symbol in reversed(start):
            entries.append((symbol, tail))
            tail = fm.compose(self._symbol_part[symbol], tail)
        self.stack.extend(reversed(entries))
        self._absorb_terminals()

    def _absorb_terminals(self):
        is_terminal = self.grammar.is_terminal
        while self.stack and is_terminal(self.stack[0][0]):
            symbol, _ = self.stack.popleft()
            self.prefix.append(symbol)
            self.prefix_box = compose_box(self.prefix_box, self._letter_box[symbol])

    @property
    def over(self) -> bool:
        return not self.stack

    @property
    def form(self) -> SententialForm:
        return tuple(self.prefix) + tuple(s for s, _ in self.stack)

    @property
    def turn(self) -> Optional[str]:
        if not self.stack:
            return None
        return self.grammar.owner[self.stack[0][0]]

    def view(self) -> PlayView:
        return PlayView(self)

    def apply(self, rule_index: int):
        if not self.stack:
            raise ValueError("play is over")
        head, tail = self.stack[0]
        rule = self.grammar.rules[rule_index]
        if rule.lhs != head:
            raise ValueError(f"rule {rule_index} does not rewrite {head}")
        self.stack.popleft()
        entries = []
        for symbol in reversed(rule.rhs):
            entries.append((symbol, tail))
            tail = fm.compose(self._symbol_part[symbol], tail)
        self.stack.extendleft(entries)
        self._absorb_terminals()


class Agent:
    kind = "agent"

    def choose(self, view: PlayView) -> int:
        raise NotImplementedError

    def observe(self, view: PlayView, rule_index: int):
        pass


class SynthesizedRefuter(Agent):
    """Plays the choice-function strategy; falls back to the lowest rule when
    the position is not (yet) winning, and locks on as soon as it is."""

    kind = "synthesized"

    def __init__(self, solution: Solution, pred: Optional[Callable[[Box], bool]] = None):
        self.solution = ensure_snapshots(solution)
        self.pred = pred if pred is not None else reject_pred(solution.system.nfa)
        self.state: Optional[RefuterStrategyState] = None

    def maybe_init(self, form: SententialForm):
        if self.state is None and fm.is_rejecting(
            eval_sentential(self.solution, form), self.pred
        ):
            self.state = refuter_init(self.solution, form, self.pred)

    def choose(self, view: PlayView) -> int:
        if self.state is None and fm.is_rejecting(view.position_formula, self.pred):
            self.state = refuter_init(self.solution, view.form, self.pred)
        if self.state is None:
            return view.legal[0].index
        rule_index, self.state = refuter_move(self.state, self.solution)
        return rule_index

    def observe(self, view: PlayView, rule_index: int):
        if self.state is not None:
            self.state = refuter_observe(self.state, self.solution, rule_index)


class SynthesizedProver(Agent):
    """Positional: lowest rule whose successor formula stays non-rejecting;
    lowest rule outright when the position is already lost."""

    kind = "synthesized"

    def __init__(self, solution: Solution):
        self.solution = solution
        self.pred = reject_pred(solution.system.nfa)

    def choose(self, view: PlayView) -> int:
        if fm.is_rejecting(view.position_formula, self.pred):
            return view.legal[0].index
        return prover_move_on_triple(self.solution, view.triple)


class RandomAgent(Agent):
    kind = "random"

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def choose(self, view: PlayView) -> int:
        return self.rng.choice(view.legal).index


class ScriptedAgent(Agent):
    kind = "scripted"

    def __init__(self, moves: Iterable[int]):
        self.moves = list(moves)
        self.at = 0

    def choose(self, view: PlayView) -> int:
        if self.at >= len(self.moves):
            raise ValueError("scripted agent ran out of moves")
        move = self.moves[self.at]
        self.at += 1
        return move


class InteractiveAgent(Agent):
    """Prompts on stdin; re-prompts on anything that is not a legal index."""

    kind = "interactive"

    def __init__(self, input_fn=None, print_fn=print):
        self.input_fn = input_fn
        self.print_fn = print_fn

    def choose(self, view: PlayView) -> int:
        grammar = view.solution.system.grammar
        self.print_fn(f"position: {grammar.render_form(view.form)}")
        for rule in view.legal:
            self.print_fn(f"  [{rule.index}] {rule.render()}")
        legal = {rule.index for rule in view.legal}
        read = self.input_fn if self.input_fn is not None else input
        while True:
            raw = read("rule index> ")
            try:
                idx = int(raw.strip())
            except ValueError:
                idx = -1
            if idx in legal:
                return idx
            self.print_fn(f"illegal move {raw.strip()!r}; pick one of {sorted(legal)}")


@dataclass
class Step:
    player: str
    rule_index: int
    after: Optional[SententialForm]


@dataclass
class Transcript:
    start: SententialForm
    steps: list[Step]
    outcome: str  # "refuter" | "prover" | "cap"
    word: Optional[SententialForm]
    cap_reached: bool
    infinite_certificate: Optional[bool]

    def rule_log(self) -> list[int]:
        return [s.rule_index for s in self.steps]

    def to_json(self, grammar: GameGrammar) -> dict:
        return {
            "start": grammar.render_form(self.start),
            "steps": [
                {
                    "player": s.player,
                    "ruleIndex": s.rule_index,
                    "after": grammar.render_form(s.after) if s.after is not None else None,
                }
                for s in self.steps
            ],
            "outcome": {
                "refuter": "refuter-wins",
                "prover": "prover-wins",
                "cap": "cap-reached",
            }[self.outcome],
            "word": grammar.render_form(self.word) if self.word is not None else None,
            "capReached": self.cap_reached,
            "proverForcesInfinite": self.infinite_certificate,
        }


def play(
    solution: Solution,
    start: SententialForm,
    refuter_agent: Agent,
    prover_agent: Agent,
    step_cap: int = 10_000,
    record_positions: bool = True,
    position_hook: Optional[Callable[[PlayView], None]] = None,
) -> Transcript:
    """Run one play to termination or the step cap.

    A capped play names no winner: it is reported as inclusion holding so
    far, with the emptiness certificate when prover can provably force an
    infinite play from the current position.
    """
    state = GameState(solution, start)
    steps: list[Step] = []
    while True:
        view = state.view()
        if position_hook is not None:
            position_hook(view)
        if state.over:
            word = tuple(state.prefix)
            winner = (
                REFUTER if box_rejecting(state.nfa, state.prefix_box) else PROVER
            )
            return Transcript(start, steps, winner, word, False, None)
        if len(steps) >= step_cap:
            cert = fm.is_false(view.position_formula)
            return Transcript(start, steps, "cap", None, True, cert)
        mover = refuter_agent if state.turn == REFUTER else prover_agent
        other = prover_agent if state.turn == REFUTER else refuter_agent
        idx = mover.choose(view)
        if idx not in {rule.index for rule in view.legal}:
            raise ValueError(f"agent chose illegal rule {idx}")
        other.observe(view, idx)
        state.apply(idx)
        steps.append(
            Step(state.grammar.owner[view.head], idx, state.form if record_positions else None)
        )


# ---------------------------------------------------------------------------
# exhaustive verification of the refuter strategy


@dataclass
class _TreeNode:
    state: RefuterStrategyState
    depth: int
    rule_taken: Optional[int] = None  # set on refuter decision nodes
    children: list[int] = field(default_factory=list)


@dataclass
class VerifyReport:
    ok: bool
    branches: int
    max_depth: int
    nodes: int
    initial_image: frozenset[Box]
    failures: list[str]


def _expand_strategy_tree(
    solution: Solution,
    start: SententialForm,
    node_budget: int,
    pred: Optional[Callable[[Box], bool]] = None,
) -> tuple[VerifyReport, list[_TreeNode]]:
    solution = ensure_snapshots(solution)
    grammar = solution.system.grammar
    nfa = solution.system.nfa
    if pred is None:
        pred = reject_pred(nfa)
    root_state = refuter_init(solution, start, pred)
    initial_image = root_state.image
    nodes = [_TreeNode(root_state, 0)]
    queue = [0]
    branches = 0
    max_depth = 0
    failures: list[str] = []
    while queue:
        node_id = queue.pop(0)
        if len(nodes) > node_budget:
            raise BudgetExceededError(
                f"strategy tree exceeded {node_budget} nodes"
            )
        node = nodes[node_id]
        form = node.state.form
        max_depth = max(max_depth, node.depth)
        split = leftmost_split(grammar, form)
        if split is None:
            branches += 1
            box = word_box(nfa, form)
            if not pred(box):
                failures.append(
                    f"play ended in {grammar.render_form(form)} whose box fails the predicate"
                )
            elif box not in initial_image:
                failures.append(
                    f"box of {grammar.render_form(form)} not in the initial choice image"
                )
            continue
        owner = grammar.owner[split[1]]
        if owner == REFUTER:
            rule_index, child = refuter_move(node.state, solution)
            node.rule_taken = rule_index
            nodes.append(_TreeNode(child, node.depth + 1))
            node.children.append(len(nodes) - 1)
            queue.append(len(nodes) - 1)
        else:
            for rule in grammar.rules_for[split[1]]:
                child = refuter_observe(node.state, solution, rule.index)
                nodes.append(_TreeNode(child, node.depth + 1))
                node.children.append(len(nodes) - 1)
                queue.append(len(nodes) - 1)
    report = VerifyReport(
        ok=not failures,
        branches=branches,
        max_depth=max_depth,
        nodes=len(nodes),
        initial_image=initial_image,
        failures=failures,
    )
    return report, nodes


def verify_refuter_exhaustive(
    solution: Solution,
    start: SententialForm,
    node_budget: int = 100_000,
    pred: Optional[Callable[[Box], bool]] = None,
) -> VerifyReport:
    """Expand every prover alternative against the synthesized strategy.

    Confirms that all branches end in a terminal word whose box satisfies
    the predicate and lies in the initial choice image.  A blown budget
    raises instead of reporting, since that is inconclusive.
    """
    report, _ = _expand_strategy_tree(solution, start, node_budget, pred)
    return report


def extract_positional_refuter(
    solution: Solution,
    start: SententialForm,
    node_budget: int = 100_000,
) -> dict[str, int]:
    """Position -> rule table read off the exhaustive strategy tree.

    When a position repeats with different memory, the occurrence with the
    smallest remaining subtree wins, which keeps table replays terminating.
    """
    _, nodes = _expand_strategy_tree(solution, start, node_budget)
    grammar = solution.system.grammar
    heights = [0] * len(nodes)
    for i in range(len(nodes) - 1, -1, -1):
        node = nodes[i]
        heights[i] = 1 + max((heights[c] for c in node.children), default=-1)
    table: dict[str, tuple[int, int]] = {}
    for i, node in enumerate(nodes):
        if node.rule_taken is None:
            continue
        key = " ".join(node.state.form)
        if key not in table or heights[i] < table[key][0]:
            table[key] = (heights[i], node.rule_taken)
    return {key: rule for key, (_, rule) in sorted(table.items())}
