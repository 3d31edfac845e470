"""Head-to-head benchmark harness.

Per parameter combo, the same generated instances (same seeds) are fed to
every engine; a cooperative deadline bounds each solve.  Averages cover
solved instances only; timeouts are reported as a percentage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from . import formula as fm
from .cachat import CachatSolver
from .errors import SolveTimeout
from .generator import GenParams, derive_seed, gen_instance
from .solver import build_system, kleene_naive, kleene_worklist, refuter_wins

ENGINES = ("naive", "worklist", "cachat")


@dataclass
class BenchSpec:
    combos: list[tuple[int, int, int]]  # (|Q|, |T|, non-terminals per player)
    count: int = 50
    timeout_ms: int = 10_000
    engines: tuple[str, ...] = ENGINES
    base_seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        unknown = set(self.engines) - set(ENGINES)
        if unknown:
            raise ValueError(f"unknown engines: {sorted(unknown)}")


@dataclass
class BenchRow:
    combo: str
    engine: str
    seed: int
    solved: bool
    ms: Optional[float]
    winner: Optional[str]


@dataclass
class BenchSummary:
    combo: str
    engine: str
    avg_ms: Optional[float]
    timeout_pct: float


@dataclass
class BenchResult:
    rows: list[BenchRow] = field(default_factory=list)
    summaries: list[BenchSummary] = field(default_factory=list)

    def rows_csv(self) -> str:
        lines = ["combo,engine,seed,solved,ms,winner"]
        for r in self.rows:
            ms = f"{r.ms:.3f}" if r.ms is not None else ""
            lines.append(
                f"{r.combo},{r.engine},{r.seed},{int(r.solved)},{ms},{r.winner or ''}"
            )
        return "\n".join(lines) + "\n"

    def summary_csv(self) -> str:
        lines = ["combo,engine,avg_ms,timeout_pct"]
        for s in self.summaries:
            avg = f"{s.avg_ms:.3f}" if s.avg_ms is not None else "n/a"
            lines.append(f"{s.combo},{s.engine},{avg},{s.timeout_pct:.1f}")
        return "\n".join(lines) + "\n"

    def markdown_table(self) -> str:
        engines = []
        for s in self.summaries:
            if s.engine not in engines:
                engines.append(s.engine)
        header = "| combo | " + " | ".join(
            f"{e} avg ms | {e} %timeout" for e in engines
        ) + " |"
        divider = "|" + "---|" * (1 + 2 * len(engines))
        by_key = {(s.combo, s.engine): s for s in self.summaries}
        combos = []
        for s in self.summaries:
            if s.combo not in combos:
                combos.append(s.combo)
        lines = [header, divider]
        for combo in combos:
            cells = [combo]
            for e in engines:
                s = by_key.get((combo, e))
                if s is None:
                    cells += ["n/a", "n/a"]
                else:
                    cells += [
                        f"{s.avg_ms:.1f}" if s.avg_ms is not None else "n/a",
                        f"{s.timeout_pct:.0f}",
                    ]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def parse_combos(text: str) -> list[tuple[int, int, int]]:
    """Parse "5/5/5,5/5/10" into (states, letters, per-player non-terminals)."""
    combos = []
    for part in text.split(","):
        part = part.strip()
        bits = part.split("/")
        if len(bits) != 3:
            raise ValueError(f"combo must look like Q/T/N, got {part!r}")
        combos.append(tuple(int(b) for b in bits))
    return combos


def combo_params(combo: tuple[int, int, int]) -> GenParams:
    q, t, m = combo
    return GenParams(
        states=q, letters=t, refuter_nonterminals=m, prover_nonterminals=m
    )


def _solve_once(engine: str, instance, deadline: float) -> Optional[str]:
    """Winner from the start position, or None via SolveTimeout."""
    if engine == "cachat":
        cs = CachatSolver(instance.grammar, instance.nfa, deadline=deadline)
        wins = cs.refuter_wins(instance.start)
    else:
        system = build_system(instance.grammar, instance.nfa)
        run = kleene_naive if engine == "naive" else kleene_worklist
        solution = run(system, deadline=deadline)
        wins = refuter_wins(solution, instance.start)
    return "refuter" if wins else "prover"


def run_bench(spec: BenchSpec, progress=None) -> BenchResult:
    result = BenchResult()
    warmup = gen_instance(GenParams(states=2, letters=2,
                                    refuter_nonterminals=1, prover_nonterminals=1), 0)
    for engine in spec.engines:
        _solve_once(engine, warmup, time.monotonic() + 60)  # excluded from stats
    for combo_index, combo in enumerate(spec.combos):
        combo_name = "/".join(str(c) for c in combo)
        params = combo_params(combo)
        instances = [
            (
                derive_seed(spec.base_seed, combo_index, i),
                gen_instance(params, derive_seed(spec.base_seed, combo_index, i)),
            )
            for i in range(spec.count)
        ]
        for engine in spec.engines:
            times = []
            timeouts = 0
            for seed, instance in instances:
                fm.clear_caches()  # no cross-engine warm-cache advantage
                began = time.monotonic()
                try:
                    winner = _solve_once(engine, instance, began + spec.timeout_ms / 1000.0)
                    ms = (time.monotonic() - began) * 1000.0
                    times.append(ms)
                    result.rows.append(
                        BenchRow(combo_name, engine, seed, True, ms, winner)
                    )
                except SolveTimeout:
                    timeouts += 1
                    result.rows.append(
                        BenchRow(combo_name, engine, seed, False, None, None)
                    )
                if progress is not None:
                    progress(combo_name, engine, seed)
            result.summaries.append(
                BenchSummary(
                    combo_name,
                    engine,
                    sum(times) / len(times) if times else None,
                    100.0 * timeouts / len(instances),
                )
            )
    return result


def winners_agree(result: BenchResult) -> bool:
    """Every instance solved by several engines got the same winner."""
    seen: dict[tuple[str, int], str] = {}
    for row in result.rows:
        if not row.solved:
            continue
        key = (row.combo, row.seed)
        if key in seen and seen[key] != row.winner:
            return False
        seen.setdefault(key, row.winner)
    return True
