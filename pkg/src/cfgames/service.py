"""Local HTTP service for the browser UI: solving plus interactive plays.

Instances and play sessions live in memory under random ids.  Machine
replies are applied eagerly, so a client always sees either its own turn
or a finished play.  Per-session mutation is serialized by a lock.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import formula as fm
from . import solver, strategy
from .automaton import box_rejecting, monoid_closure
from .errors import ParseError
from .grammar import PROVER, REFUTER
from .instance import Instance, parse_instance, parse_position

MACHINE_CAP = 10_000


@dataclass
class StoredInstance:
    instance: Instance
    solutions: dict[str, solver.Solution] = field(default_factory=dict)

    def solution(self, engine: str = "worklist") -> solver.Solution:
        if engine not in self.solutions:
            system = solver.build_system(self.instance.grammar, self.instance.nfa)
            run = solver.kleene_naive if engine == "naive" else solver.kleene_worklist
            self.solutions[engine] = run(system)
        return self.solutions[engine]


class PlaySession:
    """One interactive play; the machine sides are synthesized agents."""

    def __init__(self, stored: StoredInstance, position, human_role: str):
        self.lock = threading.Lock()
        self.instance = stored.instance
        self.solution = stored.solution("naive")
        self.human_role = human_role
        self.state = strategy.GameState(self.solution, position)
        self.history: list[dict] = []
        self.outcome: Optional[dict] = None
        self.agents = {}
        if human_role != REFUTER:
            machine = strategy.SynthesizedRefuter(self.solution)
            machine.maybe_init(position)  # choice image visible from move one
            self.agents[REFUTER] = machine
        if human_role != PROVER:
            self.agents[PROVER] = strategy.SynthesizedProver(self.solution)
        self._advance_machines()

    def _finish_if_over(self):
        if self.outcome is not None or not self.state.over:
            return
        word = tuple(self.state.prefix)
        rejecting = box_rejecting(self.state.nfa, self.state.prefix_box)
        self.outcome = {
            "winner": REFUTER if rejecting else PROVER,
            "word": self.instance.grammar.render_form(word),
            "wordBox": sorted(self.state.prefix_box.pairs()),
            "inLanguage": not rejecting,
        }

    def _apply(self, player: str, rule_index: int):
        view = self.state.view()
        for role, agent in self.agents.items():
            if role != player:
                agent.observe(view, rule_index)
        self.state.apply(rule_index)
        self.history.append(
            {
                "player": player,
                "ruleIndex": rule_index,
                "after": self.instance.grammar.render_form(self.state.form),
            }
        )
        self._finish_if_over()

    def _advance_machines(self):
        self._finish_if_over()
        while (
            self.outcome is None
            and self.state.turn in self.agents
            and len(self.history) < MACHINE_CAP
        ):
            player = self.state.turn
            rule_index = self.agents[player].choose(self.state.view())
            self._apply(player, rule_index)
        if self.outcome is None and len(self.history) >= MACHINE_CAP:
            self.outcome = {
                "winner": None,
                "word": None,
                "note": "step cap reached: inclusion holding so far",
            }

    def human_move(self, rule_index: int):
        if self.outcome is not None:
            raise HTTPException(409, "play is over")
        turn = self.state.turn
        if turn != self.human_role:
            raise HTTPException(409, "not your turn")
        legal = {rule.index for rule in self.state.view().legal}
        if rule_index not in legal:
            raise HTTPException(
                400, f"illegal rule {rule_index}; legal: {sorted(legal)}"
            )
        self._apply(self.human_role, rule_index)
        self._advance_machines()

    def snapshot(self) -> dict:
        grammar = self.instance.grammar
        view = self.state.view()
        refuter_agent = self.agents.get(REFUTER)
        choice_image = None
        if isinstance(refuter_agent, strategy.SynthesizedRefuter) and refuter_agent.state:
            choice_image = [
                sorted(b.pairs())
                for b in sorted(refuter_agent.state.image, key=lambda b: b.key)
            ]
        pred = solver.reject_pred(self.solution.system.nfa)
        formula = view.position_formula
        names = fm.name_boxes(formula.boxes())
        return {
            "form": grammar.render_form(self.state.form),
            "prefix": grammar.render_form(tuple(self.state.prefix))
            if self.state.prefix
            else "",
            "symbols": list(self.state.form),
            "turn": self.state.turn,
            "humanRole": self.human_role,
            "legalRules": [
                {"index": rule.index, "rendering": rule.render()}
                for rule in view.legal
            ],
            "choiceImage": choice_image,
            "formula": {
                "clauses": fm.render_formula(formula, names),
                "boxes": {
                    name: sorted(box.pairs())
                    for box, name in sorted(names.items(), key=lambda kv: kv[1])
                },
                "rejecting": fm.is_rejecting(formula, pred),
            },
            "history": list(self.history),
            "outcome": self.outcome,
        }


class InstanceBody(BaseModel):
    text: str


class PlayBody(BaseModel):
    instanceId: str
    position: str
    humanRole: str = "none"


class MoveBody(BaseModel):
    ruleIndex: int


def create_app(instance_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="inclusion games")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    instances: dict[str, StoredInstance] = {}
    plays: dict[str, PlaySession] = {}

    def fresh_id() -> str:
        return secrets.token_hex(8)

    if instance_dir:
        for path in sorted(Path(instance_dir).glob("*.game")):
            stored = StoredInstance(parse_instance(path.read_text(encoding="utf-8")))
            instances[path.stem] = stored

    def get_instance(instance_id: str) -> StoredInstance:
        stored = instances.get(instance_id)
        if stored is None:
            raise HTTPException(404, f"unknown instance {instance_id}")
        return stored

    @app.get("/instances")
    def list_instances():
        return {"instances": sorted(instances)}

    @app.post("/instances")
    def add_instance(body: InstanceBody):
        try:
            instance = parse_instance(body.text)
        except ParseError as exc:
            raise HTTPException(400, str(exc))
        instance_id = fresh_id()
        instances[instance_id] = StoredInstance(instance)
        return {"id": instance_id}

    @app.get("/instances/{instance_id}")
    def instance_summary(instance_id: str):
        stored = get_instance(instance_id)
        instance = stored.instance
        grammar = instance.grammar
        return {
            "id": instance_id,
            "states": list(instance.nfa.names),
            "letters": list(instance.nfa.alphabet),
            "initial": instance.nfa.names[instance.nfa.initial],
            "finals": [instance.nfa.names[q] for q in sorted(instance.nfa.finals)],
            "nonterminals": [
                {"name": x, "owner": grammar.owner[x]} for x in grammar.nonterminals
            ],
            "rules": [
                {"index": rule.index, "rendering": rule.render()}
                for rule in grammar.rules
            ],
            "start": grammar.render_form(instance.start)
            if instance.start is not None
            else None,
            "boxCount": len(monoid_closure(instance.nfa)),
        }

    @app.get("/instances/{instance_id}/solve")
    def solve_instance(instance_id: str, position: str, engine: str = "worklist"):
        stored = get_instance(instance_id)
        if engine not in ("naive", "worklist"):
            raise HTTPException(400, f"unknown engine {engine!r}")
        try:
            form = parse_position(stored.instance, position)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        solution = stored.solution(engine)
        formula = solver.eval_sentential(solution, form)
        pred = solver.reject_pred(stored.instance.nfa)
        rejecting = fm.is_rejecting(formula, pred)
        names = fm.name_boxes(formula.boxes())
        return {
            "position": stored.instance.grammar.render_form(form),
            "winner": REFUTER if rejecting else PROVER,
            "rejecting": rejecting,
            "formula": fm.render_formula(formula, names),
            "boxes": {
                name: sorted(box.pairs())
                for box, name in sorted(names.items(), key=lambda kv: kv[1])
            },
            "stats": {
                "engine": solution.stats.engine,
                "rounds": solution.stats.rounds,
                "updates": solution.stats.updates,
                "wallMs": round(solution.stats.wall_ms, 3),
            },
        }

    @app.post("/plays")
    def create_play(body: PlayBody):
        stored = get_instance(body.instanceId)
        if body.humanRole not in (REFUTER, PROVER, "none"):
            raise HTTPException(400, f"unknown role {body.humanRole!r}")
        try:
            form = parse_position(stored.instance, body.position)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        play_id = fresh_id()
        plays[play_id] = PlaySession(stored, form, body.humanRole)
        return {"playId": play_id, "state": plays[play_id].snapshot()}

    def get_play(play_id: str) -> PlaySession:
        session = plays.get(play_id)
        if session is None:
            raise HTTPException(404, f"unknown play {play_id}")
        return session

    @app.get("/plays/{play_id}")
    def play_state(play_id: str):
        session = get_play(play_id)
        with session.lock:
            return session.snapshot()

    @app.post("/plays/{play_id}/moves")
    def play_move(play_id: str, body: MoveBody):
        session = get_play(play_id)
        with session.lock:
            session.human_move(body.ruleIndex)
            return session.snapshot()

    return app
