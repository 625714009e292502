"""End-to-end checks of the satfilter command line.

All invocations go through main(argv) in-process so exit codes and outputs
are observable without spawning interpreters.
"""

import json

import pytest

from satfilter.anneal import SaSchedule
from satfilter.cli import main
from satfilter.diversity import SolutionCensus, read_census
from satfilter.filters import load_filter
from satfilter.harness import ExperimentSpec, generate_batch
from satfilter.instance import enumerate_solutions, read_dimacs, read_sidecar
from satfilter.solvers import save_schedule


def run_cli(*argv):
    return main([str(a) for a in argv])


# ---------------------------------------------------------------------- gen


def test_gen_writes_instances_and_sidecars(tmp_path):
    out = tmp_path / "batch"
    rc = run_cli("gen", "--n", 50, "--k", 4, "--efficiency", 0.75,
                 "--count", 2, "--seed", 5, "--out", out)
    assert rc == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["manifest.json", "n50-i000.cnf", "n50-i000.json",
                     "n50-i001.cnf", "n50-i001.json"]
    side = read_sidecar(out / "n50-i000.json")
    assert side["m"] == 403 and side["n"] == 50 and side["k"] == 4


def test_gen_matches_library_batch(tmp_path):
    out = tmp_path / "batch"
    assert run_cli("gen", "--n", 10, "--k", 3, "--m", 20,
                   "--count", 2, "--seed", 9, "--out", out) == 0
    spec = ExperimentSpec(k=3, n=10, m=20, instance_count=2, master_seed=9)
    expected = dict(generate_batch(spec, 10, purpose="gen"))
    got = read_dimacs(out / "n10-i000.cnf")
    assert got == expected["n10-i000"]


def test_gen_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli("gen", "--n", 3, "--k", 5, "--m", 4, "--out", tmp_path)
    assert err.value.code == 2
    with pytest.raises(SystemExit):
        run_cli("gen", "--n", 8, "--k", 3, "--out", tmp_path)  # no density flag
    with pytest.raises(SystemExit):
        run_cli("gen", "--n", 8, "--k", 3, "--m", 4, "--count", 0,
                "--out", tmp_path)


def test_gen_dedupe_flag(tmp_path):
    out = tmp_path / "batch"
    assert run_cli("gen", "--n", 6, "--k", 2, "--m", 40, "--count", 1,
                   "--dedupe", "--out", out) == 0
    inst = read_dimacs(out / "n6-i000.cnf")
    assert len(set(inst.clauses)) == len(inst.clauses)


# -------------------------------------------------------------------- solve


@pytest.fixture()
def solve_setup(tmp_path):
    out = tmp_path / "batch"
    run_cli("gen", "--n", 8, "--k", 3, "--m", 12, "--count", 1,
            "--seed", 2, "--out", out)
    cnf = out / "n8-i000.cnf"
    sched = tmp_path / "sa.json"
    save_schedule(SaSchedule(0.5, 2.0, 8), sched)
    return cnf, sched, tmp_path / "census.jsonl"


def test_solve_appends_census_records(solve_setup):
    cnf, sched, census_path = solve_setup
    rc = run_cli("solve", "--in", cnf, "--solver", "sa", "--schedule", sched,
                 "--runs", 3, "--seed", 9, "--out", census_path)
    assert rc == 0
    records = read_census(census_path)
    assert [r.run for r in records] == [0, 1, 2]
    assert {r.solver for r in records} == {"SA"}
    assert {r.instance for r in records} == {"n8-i000"}
    # records validate against the instance they claim to solve
    SolutionCensus(records, {"n8-i000": read_dimacs(cnf)})


def test_solve_continues_run_numbering(solve_setup):
    cnf, sched, census_path = solve_setup
    run_cli("solve", "--in", cnf, "--solver", "sa", "--schedule", sched,
            "--runs", 2, "--out", census_path)
    run_cli("solve", "--in", cnf, "--solver", "sa", "--schedule", sched,
            "--runs", 2, "--out", census_path)
    assert [r.run for r in read_census(census_path)] == [0, 1, 2, 3]


def test_solve_zero_runs_is_a_noop(solve_setup):
    cnf, sched, census_path = solve_setup
    assert run_cli("solve", "--in", cnf, "--solver", "sa", "--schedule", sched,
                   "--runs", 0, "--out", census_path) == 0
    assert read_census(census_path) == []


def test_solve_rejects_mismatched_schedule(solve_setup, capsys):
    cnf, sched, census_path = solve_setup
    rc = run_cli("solve", "--in", cnf, "--solver", "sqa", "--schedule", sched,
                 "--runs", 1, "--out", census_path)
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_solve_missing_schedule_file(solve_setup, capsys):
    cnf, _, census_path = solve_setup
    rc = run_cli("solve", "--in", cnf, "--solver", "sa",
                 "--schedule", "/nonexistent.json", "--out", census_path)
    assert rc == 1
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------------------ filters


def test_filter_build_and_query_round_trip(solve_setup, capsys, tmp_path):
    cnf, sched, census_path = solve_setup
    run_cli("solve", "--in", cnf, "--solver", "sa", "--schedule", sched,
            "--runs", 20, "--out", census_path)
    flt_path = tmp_path / "stored.sflt"
    rc = run_cli("filter-build", "--in", cnf, "--census", census_path,
                 "--s", 2, "--metrics", "--out", flt_path)
    assert rc == 0
    flt = load_filter(flt_path)
    assert flt.s == 2 and flt.n == 8 and flt.k == 3
    with open(str(flt_path) + ".metrics.json") as fh:
        metrics = json.load(fh)
    assert 0.0 < metrics["fpr"] < 1.0

    capsys.readouterr()
    rc = run_cli("filter-query", "--filter", flt_path,
                 "--element", "alpha", "--element", "beta")
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    for line in lines:
        element, verdict = line.split("\t")
        assert verdict in ("maybe", "definitely_not_in_set")


def test_filter_build_from_hex_solutions(solve_setup, tmp_path):
    cnf, _, _ = solve_setup
    inst = read_dimacs(cnf)
    sols = enumerate_solutions(inst, cap=30)
    hex_path = tmp_path / "solutions.txt"
    hex_path.write_text("\n".join(a.to_hex() for a in sols[:4]) + "\n")
    flt_path = tmp_path / "from-hex.sflt"
    for selection in ("first", "random", "greedy"):
        rc = run_cli("filter-build", "--in", cnf, "--solutions", hex_path,
                     "--s", 3, "--selection", selection, "--out", flt_path)
        assert rc == 0
        assert load_filter(flt_path).s == 3


def test_filter_build_pool_too_small(solve_setup, tmp_path, capsys):
    cnf, sched, census_path = solve_setup
    run_cli("solve", "--in", cnf, "--solver", "sa", "--schedule", sched,
            "--runs", 2, "--out", census_path)
    rc = run_cli("filter-build", "--in", cnf, "--census", census_path,
                 "--s", 500, "--out", tmp_path / "f.sflt")
    assert rc == 1
    assert "distinct" in capsys.readouterr().err


def test_filter_query_needs_elements(solve_setup, tmp_path):
    cnf, _, _ = solve_setup
    inst = read_dimacs(cnf)
    hex_path = tmp_path / "solutions.txt"
    hex_path.write_text(enumerate_solutions(inst, cap=30)[0].to_hex())
    flt_path = tmp_path / "f.sflt"
    run_cli("filter-build", "--in", cnf, "--solutions", hex_path, "--s", 1,
            "--out", flt_path)
    with pytest.raises(SystemExit) as err:
        run_cli("filter-query", "--filter", flt_path)
    assert err.value.code == 2


def test_filter_query_elements_file(solve_setup, tmp_path, capsys):
    cnf, _, _ = solve_setup
    inst = read_dimacs(cnf)
    hex_path = tmp_path / "solutions.txt"
    hex_path.write_text(enumerate_solutions(inst, cap=30)[0].to_hex())
    flt_path = tmp_path / "f.sflt"
    run_cli("filter-build", "--in", cnf, "--solutions", hex_path, "--s", 1,
            "--out", flt_path)
    batch = tmp_path / "elements.txt"
    batch.write_text("one\ntwo\nthree\n")
    capsys.readouterr()
    assert run_cli("filter-query", "--filter", flt_path,
                   "--elements-file", batch) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 3


def test_filter_query_corrupt_file(tmp_path, capsys):
    bad = tmp_path / "junk.sflt"
    bad.write_bytes(b"not a filter at all")
    assert run_cli("filter-query", "--filter", bad, "--element", "x") == 1
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------------------ analyze


def analyze_args(mini, kind, out, *extra):
    _, exp_dir, _ = mini
    return ["analyze", "--kind", kind,
            "--census", exp_dir / "census.jsonl",
            "--instances", exp_dir / "instances",
            "--out", out, *extra]


@pytest.mark.parametrize(
    "kind,csv_name,extra",
    [
        ("distinct-curve", "distinct_curves.csv", ()),
        ("fpr-curve", "fpr_curves.csv", ("--s-max", 4, "--resamples", 3)),
        ("efficiency-curve", "efficiency_curves.csv",
         ("--s-max", 4, "--resamples", 3)),
        ("hamming", "hamming.csv", ()),
        ("hardness", "hardness_curves.csv", ("--solver", "SA")),
        ("mixing", "mixing_curves.csv",
         ("--solver-a", "SQA", "--solver-b", "SA", "--s-max", 4,
          "--resamples", 3)),
        ("prob-to-find", "prob_to_find.csv",
         ("--solver", "SA", "--oracle-solver", "SA")),
        ("cross-table", "cross_table.csv", ()),
    ],
)
def test_analyze_kinds_write_csv_and_figure(mini_experiment, tmp_path,
                                            kind, csv_name, extra):
    rc = run_cli(*analyze_args(mini_experiment, kind, tmp_path, *extra))
    assert rc == 0
    assert (tmp_path / csv_name).exists()
    pngs = list(tmp_path.glob("*.png"))
    assert len(pngs) == 1
    assert pngs[0].stat().st_size > 0
    assert (tmp_path / "manifest.json").exists()


def test_analyze_no_plots_skips_figures(mini_experiment, tmp_path):
    rc = run_cli(*analyze_args(mini_experiment, "distinct-curve", tmp_path,
                               "--no-plots"))
    assert rc == 0
    assert (tmp_path / "distinct_curves.csv").exists()
    assert list(tmp_path.glob("*.png")) == []


def test_analyze_normalized_distinct_curve(mini_experiment, tmp_path):
    rc = run_cli(*analyze_args(mini_experiment, "distinct-curve", tmp_path,
                               "--normalizer", "by_sa_total", "--no-plots"))
    assert rc == 0
    text = (tmp_path / "distinct_curves.csv").read_text()
    assert "by_sa_total" in text


def test_analyze_prob_to_find_enumerated_oracle(mini_experiment, tmp_path):
    rc = run_cli(*analyze_args(mini_experiment, "prob-to-find", tmp_path,
                               "--solver", "SA", "--no-plots",
                               "--percentiles", "50,100"))
    assert rc == 0
    text = (tmp_path / "prob_to_find.csv").read_text()
    assert text.count("\n") == 3  # header + one row per percentile


def test_analyze_cross_table_options(mini_experiment, tmp_path):
    rc = run_cli(*analyze_args(mini_experiment, "cross-table", tmp_path,
                               "--solvers", "SA,SQA", "--first-runs", 10,
                               "--no-plots"))
    assert rc == 0
    text = (tmp_path / "cross_table.csv").read_text()
    assert "SA" in text and "WS" not in text


def test_analyze_usage_errors(mini_experiment, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(*analyze_args(mini_experiment, "novelty", tmp_path))
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run_cli(*analyze_args(mini_experiment, "hardness", tmp_path))
    assert err.value.code == 2


def test_analyze_missing_inputs(mini_experiment, tmp_path, capsys):
    _, exp_dir, _ = mini_experiment
    rc = run_cli("analyze", "--kind", "hamming",
                 "--census", tmp_path / "missing.jsonl",
                 "--instances", exp_dir / "instances", "--out", tmp_path)
    assert rc == 1
    empty = tmp_path / "empty"
    empty.mkdir()
    rc = run_cli("analyze", "--kind", "hamming",
                 "--census", exp_dir / "census.jsonl",
                 "--instances", empty, "--out", tmp_path)
    assert rc == 1
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------- sweep and scaling


def test_sweep_from_toml_config(tmp_path, capsys):
    config = tmp_path / "sweep.toml"
    config.write_text(
        "\n".join(
            [
                "k = 3",
                "n = 8",
                "alpha = 1.5",
                "instance_count = 2",
                "runs_per_instance = 5",
                "master_seed = 21",
                'solvers = ["SA"]',
                "mcs = 8",
                "sa_grid = [[0.1, 2.0]]",
                "sqa_grid = [[1.5, 0.0, 3.0, 16]]",
                "pilot_runs = 2",
            ]
        )
    )
    out = tmp_path / "sweep-out"
    assert run_cli("sweep", "--config", config, "--out", out) == 0
    assert (out / "census.jsonl").exists()
    assert (out / "distinct_curves.png").exists()
    assert "census complete" in capsys.readouterr().out
    assert len(read_census(out / "census.jsonl")) == 2 * 5


def test_sweep_no_plots(tmp_path):
    config = tmp_path / "sweep.json"
    spec = ExperimentSpec(k=3, n=8, alpha=1.5, instance_count=1,
                          runs_per_instance=3, master_seed=4, solvers=("SA",),
                          mcs=8, sa_grid=((0.1, 2.0),), pilot_runs=2)
    config.write_text(json.dumps(spec.to_json()))
    out = tmp_path / "out"
    assert run_cli("sweep", "--config", config, "--out", out, "--no-plots") == 0
    assert not (out / "distinct_curves.png").exists()


def test_scaling_from_json_config(tmp_path, capsys):
    spec = ExperimentSpec(k=3, n_grid=(6, 8), alpha=1.5, instance_count=2,
                          master_seed=5, solvers=("SA",), mcs=8,
                          sa_grid=((0.1, 2.0),), pilot_runs=2, scaling_runs=4)
    config = tmp_path / "scaling.json"
    config.write_text(json.dumps(spec.to_json()))
    out = tmp_path / "out"
    assert run_cli("scaling", "--config", config, "--out", out) == 0
    assert (out / "effort.csv").exists()
    assert (out / "effort.png").exists()
    assert "n=6 SA:" in capsys.readouterr().out


def test_cli_requires_a_subcommand():
    with pytest.raises(SystemExit) as err:
        run_cli()
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run_cli("frobnicate")
    assert err.value.code == 2
