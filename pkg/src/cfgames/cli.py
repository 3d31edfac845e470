"""Command-line surface: solve, strategy, play, gen, bench, cachat, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import formula as fm
from . import solver, strategy
from .bench import BenchSpec, parse_combos, run_bench, winners_agree
from .cachat import CachatSolver
from .errors import BudgetExceededError, InternalInvariantError, ParseError
from .generator import GenParams, gen_instance
from .grammar import PROVER, REFUTER
from .instance import (
    Instance,
    instance_from_generated,
    parse_instance,
    parse_position,
    render_instance,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _load(path: str) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _position(instance: Instance, text):
    if text is not None:
        return parse_position(instance, text)
    if instance.start is not None:
        return instance.start
    raise ValueError("no --position given and the instance has no [start] section")


def _emit(payload: dict, as_json: bool):
    if as_json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for key in sorted(payload):
            print(f"{key}: {payload[key]}")


def _solve_payload(instance: Instance, position, engine: str, predicate: str,
                   with_stats: bool) -> dict:
    system = solver.build_system(instance.grammar, instance.nfa)
    run = solver.kleene_naive if engine == "naive" else solver.kleene_worklist
    solution = run(system)
    pred = (
        solver.reject_pred(instance.nfa)
        if predicate == "reject"
        else solver.accept_pred(instance.nfa)
    )
    position_formula = solver.eval_sentential(solution, position)
    rejecting = fm.is_rejecting(position_formula, pred)
    names = fm.name_boxes(
        position_formula.boxes()
        | {b for f in solution.final.values() for b in f.boxes()}
    )
    payload = {
        "position": instance.grammar.render_form(position),
        "predicate": predicate,
        "rejecting": rejecting,
        "winner": REFUTER if rejecting else PROVER,
        "formula": fm.render_formula(position_formula, names),
        "solution": {
            x: fm.render_formula(solution.final[x], names)
            for x in instance.grammar.nonterminals
        },
        "boxes": {
            name: sorted(box.pairs())
            for box, name in sorted(names.items(), key=lambda kv: kv[1])
        },
    }
    if with_stats:
        payload["stats"] = {
            "engine": solution.stats.engine,
            "rounds": solution.stats.rounds,
            "updates": solution.stats.updates,
            "clauseCounts": solution.stats.clause_counts,
            "wallMs": round(solution.stats.wall_ms, 3),
        }
    return payload


def cmd_solve(args) -> int:
    instance = _load(args.file)
    position = _position(instance, args.position)
    payload = _solve_payload(instance, position, args.engine, args.predicate, args.stats)
    _emit(payload, args.json)
    return EXIT_OK


def cmd_cachat(args) -> int:
    instance = _load(args.file)
    position = _position(instance, args.position)
    cs = CachatSolver(instance.grammar, instance.nfa)
    wins = cs.refuter_wins(position)
    _emit(
        {
            "position": instance.grammar.render_form(position),
            "winner": REFUTER if wins else PROVER,
            "engine": "cachat",
            "stats": {
                "rounds": cs.stats.rounds,
                "transitionsAdded": cs.stats.updates,
                "wallMs": round(cs.stats.wall_ms, 3),
            },
        },
        args.json,
    )
    return EXIT_OK


def cmd_strategy(args) -> int:
    instance = _load(args.file)
    position = _position(instance, args.position)
    system = solver.build_system(instance.grammar, instance.nfa)
    solution = solver.kleene_naive(system)
    if not solver.refuter_wins(solution, position):
        payload = {
            "position": instance.grammar.render_form(position),
            "winner": PROVER,
            "note": "prover wins; her positional strategy picks, at each of "
            "her positions, the lowest rule keeping the formula non-rejecting",
        }
    else:
        try:
            report = strategy.verify_refuter_exhaustive(
                solution, position, args.verify_budget
            )
        except BudgetExceededError:
            print(
                f"verification budget {args.verify_budget} exceeded", file=sys.stderr
            )
            return EXIT_INTERNAL
        table = strategy.extract_positional_refuter(
            solution, position, args.verify_budget
        )
        payload = {
            "position": instance.grammar.render_form(position),
            "winner": REFUTER,
            "verified": report.ok,
            "branches": report.branches,
            "maxDepth": report.max_depth,
            "initialChoiceImage": [
                sorted(b.pairs()) for b in sorted(report.initial_image, key=lambda b: b.key)
            ],
            "table": table,
        }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def _agents(args, solution):
    refuter_agent = strategy.SynthesizedRefuter(solution)
    prover_agent = strategy.SynthesizedProver(solution)
    if args.script is not None:
        moves = [int(tok) for tok in args.script.split(",") if tok.strip() != ""]
        shared = strategy.ScriptedAgent(moves)
        return shared, shared
    if args.human == REFUTER:
        refuter_agent = strategy.InteractiveAgent()
    elif args.human == PROVER:
        prover_agent = strategy.InteractiveAgent()
    return refuter_agent, prover_agent


def cmd_play(args) -> int:
    instance = _load(args.file)
    position = _position(instance, args.position)
    solution = solver.kleene_naive(solver.build_system(instance.grammar, instance.nfa))
    refuter_agent, prover_agent = _agents(args, solution)
    transcript = strategy.play(
        solution, position, refuter_agent, prover_agent, step_cap=args.cap
    )
    payload = transcript.to_json(instance.grammar)
    if transcript.outcome == "cap":
        payload["note"] = "step cap reached: inclusion holding so far, no winner declared"
    _emit(payload, args.json)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = GenParams(
        states=args.states,
        letters=args.letters,
        density=args.density,
        final_fraction=args.final_fraction,
        refuter_nonterminals=args.refuter_nonterminals,
        prover_nonterminals=args.prover_nonterminals,
        refuter_rules=args.refuter_rules,
        prover_rules=args.prover_rules,
        p_first_terminal=args.p_a,
        p_nonterminal=args.p_y,
        p_second_terminal=args.p_b,
        initial_final=args.initial_final,
    )
    text = render_instance(instance_from_generated(gen_instance(params, args.seed)))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = BenchSpec(
        combos=parse_combos(args.combos),
        count=args.count,
        timeout_ms=args.timeout_ms,
        engines=tuple(args.engines.split(",")),
        base_seed=args.seed,
    )
    result = run_bench(spec)
    if args.out:
        Path(args.out).write_text(result.rows_csv(), encoding="utf-8")
        summary_path = Path(args.out).with_suffix(".summary.csv")
        summary_path.write_text(result.summary_csv(), encoding="utf-8")
    print(result.markdown_table())
    print(result.summary_csv())
    if not winners_agree(result):
        print("engines disagreed on some instance", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(instance_dir=args.instance_dir)
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfgames",
        description="Inclusion games on context-free grammars against NFA "
        "specifications: solving, strategy synthesis, and play.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide the winner from a position")
    p.add_argument("file")
    p.add_argument("--position")
    p.add_argument("--engine", choices=["naive", "worklist"], default="worklist")
    p.add_argument("--predicate", choices=["reject", "accept"], default="reject")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("cachat", help="run the saturation baseline")
    p.add_argument("file")
    p.add_argument("--position")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_cachat)

    p = sub.add_parser("strategy", help="synthesize and verify strategies")
    p.add_argument("file")
    p.add_argument("--position")
    p.add_argument("--out")
    p.add_argument("--verify-budget", type=int, default=100_000)
    p.set_defaults(fn=cmd_strategy)

    p = sub.add_parser("play", help="play a game against the engine")
    p.add_argument("file")
    p.add_argument("--position")
    p.add_argument("--human", choices=[REFUTER, PROVER, "none"], default="none")
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--script", help="comma-separated rule indices for both sides")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--letters", type=int, default=5)
    p.add_argument("--density", type=float, default=2.0)
    p.add_argument("--final-fraction", type=float, default=0.5)
    p.add_argument("--refuter-nonterminals", type=int, default=5)
    p.add_argument("--prover-nonterminals", type=int, default=5)
    p.add_argument("--refuter-rules", type=int, default=0)
    p.add_argument("--prover-rules", type=int, default=0)
    p.add_argument("--p-a", type=float, default=0.8)
    p.add_argument("--p-y", type=float, default=0.8)
    p.add_argument("--p-b", type=float, default=0.8)
    p.add_argument("--initial-final", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("bench", help="benchmark the engines head to head")
    p.add_argument("--combos", default="5/5/5,5/5/10")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--timeout-ms", type=int, default=10_000)
    p.add_argument("--engines", default="naive,worklist,cachat")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP play service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--instance-dir")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ParseError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
