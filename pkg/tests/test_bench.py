import pytest

from cfgames.bench import (
    BenchSpec,
    combo_params,
    parse_combos,
    run_bench,
    winners_agree,
)


def test_parse_combos():
    assert parse_combos("5/5/5, 5/5/10") == [(5, 5, 5), (5, 5, 10)]
    with pytest.raises(ValueError):
        parse_combos("5/5")


def test_combo_params():
    params = combo_params((5, 10, 15))
    assert params.states == 5 and params.letters == 10
    assert params.refuter_nonterminals == 15 and params.prover_nonterminals == 15


def test_spec_validation():
    with pytest.raises(ValueError):
        BenchSpec(combos=[(2, 2, 2)], count=0)
    with pytest.raises(ValueError):
        BenchSpec(combos=[(2, 2, 2)], timeout_ms=0)
    with pytest.raises(ValueError):
        BenchSpec(combos=[(2, 2, 2)], engines=("turbo",))


def test_run_bench_small():
    spec = BenchSpec(combos=[(2, 2, 2)], count=3, timeout_ms=30_000, base_seed=5)
    result = run_bench(spec)
    assert len(result.rows) == 3 * 3
    assert len(result.summaries) == 3
    assert all(row.solved for row in result.rows)
    assert winners_agree(result)
    # identical instances per engine: same seed audit column
    seeds = {engine: [] for engine in ("naive", "worklist", "cachat")}
    for row in result.rows:
        seeds[row.engine].append(row.seed)
    assert seeds["naive"] == seeds["worklist"] == seeds["cachat"]


def test_bench_timeout_accounting():
    spec = BenchSpec(
        combos=[(4, 3, 4)], count=2, timeout_ms=1, engines=("naive",), base_seed=1
    )
    result = run_bench(spec)
    summary = result.summaries[0]
    solved = [r for r in result.rows if r.solved]
    if solved:
        assert summary.avg_ms is not None
    else:
        assert summary.avg_ms is None and summary.timeout_pct == 100.0


def test_csv_and_markdown_output():
    spec = BenchSpec(
        combos=[(2, 2, 2)], count=2, timeout_ms=30_000,
        engines=("worklist", "cachat"), base_seed=9,
    )
    result = run_bench(spec)
    rows_csv = result.rows_csv()
    assert rows_csv.startswith("combo,engine,seed,solved,ms,winner")
    assert len(rows_csv.strip().splitlines()) == 1 + 4
    summary_csv = result.summary_csv()
    assert "2/2/2,worklist" in summary_csv
    table = result.markdown_table()
    assert table.splitlines()[0].startswith("| combo |")
    assert "2/2/2" in table
