import json

import pytest

from mpcforge.bench import (COLUMNS, SCHEMA_VERSION, RunReport, SweepSpec, build_config, emit_report, load_report,
                            main, run_benchmark, sweep)
from mpcforge.errors import ConfigError


def test_single_run_reports_traffic():
    rep = run_benchmark(build_config("Rep3Ring"), "compare", 1024, git="x")
    assert rep.status == "ok"
    assert rep.global_bytes > 0 and rep.rounds > 0
    assert sum(rep.per_party) == rep.global_bytes
    assert rep.latency > 0


def test_timeout_drops_byte_figure():
    rep = run_benchmark(build_config("Spdz2k"), "sort", 64, bandwidth="1g", timeout=0.001, git="x")
    assert rep.status == "timeout"
    assert rep.global_bytes is None and rep.rounds is None
    assert rep.latency is not None


def test_bad_configuration():
    with pytest.raises(ConfigError):
        build_config("Rep4", parties=3)
    with pytest.raises(ConfigError):
        run_benchmark(build_config("Semi2k"), "fft", 4)
    with pytest.raises(ConfigError):
        run_benchmark(build_config("Semi2k"), "compare", 0)


def test_sweep_grid_and_errors():
    spec = SweepSpec(["Semi2k", "Rep3Ring"], ["compare", "inner"], [8], bits=(32,))
    reps = sweep(spec)
    assert len(reps) == 4
    assert {(r.family, r.kernel) for r in reps} == {(f, k) for f in spec.families for k in spec.kernels}
    assert all(r.status == "ok" for r in reps)
    bad = sweep(SweepSpec(["Rep4"], ["compare"], [4], parties=(3,)))
    assert bad[0].status == "error" and bad[0].global_bytes is None
    with pytest.raises(ConfigError):
        sweep(SweepSpec([], ["compare"], [4]))


def test_same_seed_same_counts():
    a = run_benchmark(build_config("Spdz2k", bits=32, seed=3), "inner", 32, git="x")
    b = run_benchmark(build_config("Spdz2k", bits=32, seed=3), "inner", 32, git="x")
    assert (a.global_bytes, a.rounds, a.per_party) == (b.global_bytes, b.rounds, b.per_party)


def test_bytes_grow_with_n():
    sizes = [run_benchmark(build_config("Semi2k", bits=32), "compare", n, git="x").global_bytes
             for n in (16, 64, 256)]
    assert sizes[0] < sizes[1] < sizes[2]


@pytest.mark.parametrize("fmt,suffix", [("csv", ".csv"), ("json", ".json")])
def test_emit_load_round_trip(tmp_path, fmt, suffix):
    reps = sweep(SweepSpec(["Semi2k"], ["compare", "inner"], [4], bits=(16,)))
    reps.append(RunReport("Spdz2k", "sort", 8, 64, 2, status="timeout", latency=1.5, error="deadline"))
    path = emit_report(reps, tmp_path / f"r{suffix}", fmt)
    assert load_report(path) == reps


def test_csv_header_and_empty(tmp_path):
    path = emit_report([], tmp_path / "e.csv")
    assert path.read_text().strip() == ",".join(COLUMNS)
    assert load_report(path) == []
    with pytest.raises(ConfigError):
        emit_report([], tmp_path / "e.xml", "xml")


def test_json_schema_checked(tmp_path):
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"schema": SCHEMA_VERSION + 1, "runs": []}))
    with pytest.raises(ConfigError):
        load_report(p)


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert main(["--family", "Semi2k", "--kernel", "compare", "--n", "8", "--bits", "16", "--out", str(out)]) == 0
    assert load_report(out)[0].status == "ok"
    assert main(["--family", "Rep4", "--parties", "3", "--n", "4"]) == 1
    assert main(["--kernel", "compare", "--n", "8", "--bits", "16", "--timeout", "0.0001",
                 "--family", "Spdz2k", "--bandwidth", "1g"]) == 1
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("family=Nope\n")
    assert main(["--config", str(cfgfile)]) == 2
    with pytest.raises(SystemExit):
        main(["--bandwidth", "3g"])
    capsys.readouterr()


def test_cli_config_file(tmp_path, capsys):
    cfg = build_config("Rep3Ring", bits=16, conversion="local")
    path = tmp_path / "p.cfg"
    cfg.save(path)
    assert main(["--config", str(path), "--kernel", "compare,inner", "--n", "4", "--format", "json",
                 "--out", str(tmp_path / "o.json")]) == 0
    reps = load_report(tmp_path / "o.json")
    assert [r.kernel for r in reps] == ["compare", "inner"]
    assert all(r.conversion == "local" for r in reps)
    assert main(["--family", "Semi2k", "--n", "2", "--bits", "8"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split(",") == COLUMNS and len(lines) == 2
