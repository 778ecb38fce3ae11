import hashlib

import pytest

from rodd import cli


def run(*argv):
    return cli.main(list(argv))


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_parse_grid_colon_syntax():
    grid = cli.parse_grid("0.02:0.98:0.02")
    assert len(grid) == 49
    assert grid[0] == pytest.approx(0.02)
    assert grid[-1] == pytest.approx(0.98)


def test_parse_grid_comma_list():
    assert cli.parse_grid("0.1,0.5") == [0.1, 0.5]


def test_parse_grid_rejects_garbage():
    with pytest.raises(cli.UsageError):
        cli.parse_grid("0.1:0.9")
    with pytest.raises(cli.UsageError):
        cli.parse_grid("0.9:0.1:0.1")
    with pytest.raises(cli.UsageError):
        cli.parse_grid("a:b:c")
    with pytest.raises(cli.UsageError):
        cli.parse_q_grid("0:0.9:0.1")


def test_fig2_row_count_and_determinism(tmp_path):
    out = tmp_path / "fig2.csv"
    hashes = set()
    for _ in range(3):
        assert run("fig2", "--K", "3,5,20", "--q", "0.02:0.98:0.02",
                   "--out", str(out)) == 0
        hashes.add(digest(out))
    assert len(hashes) == 1
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 148  # header + 147 rows
    assert out.read_bytes().count(b"\r") == 0


def test_fig2_check_passes(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    assert run("fig2", "--K", "3", "--q", "0.1:0.9:0.4", "--check",
               "--out", str(out)) == 0
    assert "PASS" in capsys.readouterr().out


def test_fig2_empty_grid_is_usage_error(tmp_path):
    assert run("fig2", "--q", "0.9:0.1:0.1", "--out", str(tmp_path / "x")) == 2


def test_fig3_writes_gamma_column(tmp_path):
    out = tmp_path / "fig3.csv"
    assert run("fig3", "--gamma-db", "20", "--K", "3,5", "--q", "0.1:0.9:0.2",
               "--out", str(out)) == 0
    assert ",100," in out.read_text().splitlines()[1]


def test_fig3_infinite_gamma_guard(tmp_path):
    assert run("fig3", "--gamma-db=-inf", "--out", str(tmp_path / "x")) == 2


def test_seed_is_mandatory(tmp_path):
    assert run("discover", "--n", "30", "--neighbors", "4",
               "--out", str(tmp_path / "x")) == 2
    assert run("sparsecode", "--K", "3", "--mu", "4", "--trials", "2",
               "--out", str(tmp_path / "x")) == 2
    assert run("validate", "--out", str(tmp_path / "x")) == 2


def test_discover_smoke(tmp_path):
    out = tmp_path / "d.csv"
    assert run("discover", "--n", "20", "--neighbors", "4", "--M", "200",
               "--q", "0.1", "--area", "100", "--seed", "1",
               "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("receiver,")
    assert lines[-1].startswith("aggregate,")


def test_discover_determinism(tmp_path):
    out = tmp_path / "d.csv"
    argv = ["discover", "--n", "60", "--neighbors", "5", "--M", "300",
            "--q", "0.1", "--area", "100", "--mode", "energy", "--seed", "4",
            "--out", str(out)]
    hashes = {(run(*argv), digest(out)) for _ in range(3)}
    assert len(hashes) == 1


def test_discover_threshold_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run("discover", "--n", "40", "--neighbors", "4", "--M", "200",
               "--q", "0.1", "--area", "100", "--mode", "energy",
               "--threshold-sweep", "5:45:20", "--seed", "2",
               "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "threshold,mean_miss_rate,mean_false_alarm_rate,mean_accuracy"
    assert len(lines) == 4


def test_threshold_sweep_requires_energy_mode(tmp_path):
    assert run("discover", "--n", "20", "--neighbors", "4", "--seed", "1",
               "--threshold-sweep", "1:2:1", "--out", str(tmp_path / "x")) == 2


def test_sparsecode_determinism(tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sparsecode", "--K", "4", "--mu", "8", "--q", "0.12", "--M", "128",
            "--trials", "5", "--seed", "3", "--out", str(out)]
    hashes = {(run(*argv), digest(out)) for _ in range(3)}
    assert len(hashes) == 1
    assert out.read_text().startswith("trial,receiver,neighbor,outcome")


def test_validate_check_exit_codes(tmp_path):
    out = tmp_path / "v.csv"
    assert run("validate", "--seed", "3", "--M", "20000", "--check",
               "--out", str(out)) == 0
    # deterministic 3-sigma exceedance: seed 37 at M=5000 on the OR suite
    assert run("validate", "--suite", "or", "--seed", "37", "--M", "5000",
               "--check", "--out", str(out)) == 3
    assert ",FAIL" in out.read_text()


def test_asym_command(tmp_path):
    gains = tmp_path / "gains.txt"
    gains.write_text("# 2x2 demo\n0 100\n100 0\n", encoding="utf-8")
    out = tmp_path / "a.csv"
    assert run("asym", "--gains-file", str(gains), "--q", "0.5",
               "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "node,q,rate_bound"
    assert len(lines) == 3


def test_asym_rejects_ragged_matrix(tmp_path):
    gains = tmp_path / "gains.txt"
    gains.write_text("0 1\n1\n", encoding="utf-8")
    assert run("asym", "--gains-file", str(gains), "--out",
               str(tmp_path / "x")) == 2


def test_asym_q_count_mismatch(tmp_path):
    gains = tmp_path / "gains.txt"
    gains.write_text("0 1 1\n1 0 1\n1 1 0\n", encoding="utf-8")
    assert run("asym", "--gains-file", str(gains), "--q", "0.2,0.3",
               "--out", str(tmp_path / "x")) == 2


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 3\nM = 128\ntrials = 5  # inline comment\n"
                   "K = 4\nmu = 8\nq = 0.12\n", encoding="utf-8")
    out_cfg = tmp_path / "a.csv"
    out_flag = tmp_path / "b.csv"
    assert run("sparsecode", "--config", str(cfg), "--out", str(out_cfg)) == 0
    assert run("sparsecode", "--K", "4", "--mu", "8", "--q", "0.12", "--M", "128",
               "--trials", "5", "--seed", "3", "--out", str(out_flag)) == 0
    assert out_cfg.read_bytes() == out_flag.read_bytes()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 3\nM = 128\ntrials = 5\nK = 4\nmu = 8\nq = 0.12\n",
                   encoding="utf-8")
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run("sparsecode", "--config", str(cfg), "--out", str(a)) == 0
    assert run("sparsecode", "--config", str(cfg), "--trials", "2",
               "--out", str(b)) == 0
    assert len(a.read_text().splitlines()) > len(b.read_text().splitlines())


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n", encoding="utf-8")
    assert run("sparsecode", "--config", str(cfg), "--seed", "1",
               "--out", str(tmp_path / "x")) == 2


def test_trace_or_mode(tmp_path):
    out = tmp_path / "t.txt"
    assert run("trace", "--n", "4", "--M", "50", "--seed", "12",
               "--out", str(out)) == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 50
    assert all(ln.split()[1] in ("E", "0", "1") for ln in lines)


def test_trace_gauss_mode_deterministic(tmp_path):
    out = tmp_path / "t.txt"
    argv = ["trace", "--n", "4", "--M", "40", "--mode", "gauss",
            "--noise-var", "0.5", "--seed", "12", "--out", str(out)]
    hashes = {(run(*argv), digest(out)) for _ in range(3)}
    assert len(hashes) == 1


def test_trace_receiver_out_of_range(tmp_path):
    assert run("trace", "--n", "3", "--receiver", "99", "--seed", "1",
               "--out", str(tmp_path / "x")) == 2


def test_no_command_prints_usage():
    assert run() == 2


def test_unknown_flag_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("fig2", "--bogus")
    assert exc.value.code == 2
