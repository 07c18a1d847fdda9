"""Command line interface: config handling, outputs, exit codes."""

import csv
import io
import json

import pytest

from mac3mg import cli
from mac3mg.twogrid import TransferPair, two_grid_factor_table
from mac3mg.symbols import reference_params


def run_cli(args):
    return cli.main(args)


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


# -- config plumbing -------------------------------------------------------


def test_parse_nus():
    assert cli._parse_nus("1,2,3") == (1, 2, 3)
    assert cli._parse_nus("4") == (4,)
    assert cli._parse_nus("1, 2") == (1, 2)
    with pytest.raises(cli.ConfigError):
        cli._parse_nus("1,a")


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a comment\n"
        "scheme = qdr\n"
        "nu = 1,2  # trailing comment\n"
        "omega-j = 0.8\n"
        "\n"
        "seed=5\n"
    )
    values = cli.load_config_file(str(path))
    assert values == {"scheme": "qdr", "nu": "1,2", "omega_j": "0.8", "seed": "5"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("scheme qdr\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config_file(str(bad))
    with pytest.raises(cli.ConfigError):
        cli.load_config_file(str(tmp_path / "missing.cfg"))


def test_validate_rejects_bad_values():
    cfg = cli.ExperimentConfig(command="mg-run")
    cfg.validate()
    for attr, value in (
        ("scheme", "jacobi"),
        ("transfer", "r4"),
        ("bc", "neumann"),
        ("fmt", "yaml"),
        ("nus", ()),
        ("nus", (0,)),
        ("n", 2),
        ("resolution", 1),
    ):
        broken = cli.ExperimentConfig(command="mg-run")
        setattr(broken, attr, value)
        with pytest.raises(cli.ConfigError):
            broken.validate()


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("scheme = qdr\nnu = 1,2\nformat = json\nresolution = 27\n")
    args = cli.make_parser().parse_args(
        ["twogrid-lfa", "--config", str(path), "--scheme", "qbsr"]
    )
    cfg = cli.build_config(args)
    assert cfg.scheme == "qbsr"  # flag wins
    assert cfg.nus == (1, 2)  # file value survives
    assert cfg.fmt == "json"
    assert cfg.resolution == 27


def test_unknown_config_key_fails(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("cycles = 3\n")
    assert run_cli(["mg-run", "--config", str(path)]) == 1


def test_bad_flag_values_exit_one(capsys):
    assert run_cli(["mg-run", "--nu", "1,x", "--n", "9"]) == 1
    assert run_cli(["twogrid-lfa", "--scheme", "bogus"]) == 1
    assert run_cli(["mg-run", "--config", "/nonexistent/path.cfg"]) == 1
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run_cli(["--help"]) == 0
    out = capsys.readouterr().out
    assert "smooth-opt" in out and "selftest" in out


def test_resolve_params_applies_overrides():
    cfg = cli.ExperimentConfig(command="mg-run", scheme="quzawa", omega=0.9)
    params = cli.resolve_params(cfg, "lfa")
    ref = reference_params("quzawa")
    assert params.omega == 0.9
    assert params.alpha == ref.alpha and params.sigma == ref.sigma
    # overrides are validated through the parameter dataclass
    bad = cli.ExperimentConfig(command="mg-run", scheme="qibsr", omega_j=3.0)
    with pytest.raises(cli.ConfigError):
        cli.resolve_params(bad, "lfa")


# -- commands --------------------------------------------------------------


def test_smooth_opt_reports_small_gap(tmp_path):
    out = tmp_path / "opt.json"
    code = run_cli(["smooth-opt", "--scheme", "qdr", "--format", "json",
                    "--out", str(out), "--resolution", "81"])
    assert code == 0
    report = read_json(str(out))
    assert report["mu_rational"] == "17/47"
    assert report["under_root"] is False
    row = report["rows"][0]
    assert abs(row["mu_analytic"] - 17.0 / 47.0) < 1e-12
    assert row["gap"] < 1e-3


def test_smooth_opt_uzawa_under_root(tmp_path):
    out = tmp_path / "opt.json"
    assert run_cli(["smooth-opt", "--scheme", "quzawa", "--format", "json",
                    "--out", str(out), "--resolution", "27"]) == 0
    report = read_json(str(out))
    assert report["mu_rational"] == "17/47"
    assert report["under_root"] is True


def test_twogrid_lfa_rows_match_library(tmp_path):
    out = tmp_path / "lfa.csv"
    code = run_cli(["twogrid-lfa", "--scheme", "qdr", "--transfer", "r9b",
                    "--nu", "1,2", "--resolution", "27", "--out", str(out)])
    assert code == 0
    rows = read_csv(str(out))
    table = two_grid_factor_table(reference_params("qdr"), TransferPair("r9b"),
                                  nus=(1, 2), n=27, h=1.0 / 27.0)
    assert [r["nu"] for r in rows] == ["1", "2"]
    for row in rows:
        assert row["rho_lfa"] == f"{table[int(row['nu'])]:.3f}"
        assert row["scheme"] == "qdr" and row["transfer"] == "r9b"


def test_mg_run_small_grid(tmp_path):
    out = tmp_path / "run.json"
    code = run_cli(["mg-run", "--scheme", "qibsr", "--n", "9", "--nu", "1,2",
                    "--resolution", "27", "--format", "json", "--out", str(out)])
    assert code == 0
    report = read_json(str(out))
    rows = report["rows"]
    assert {r["cycle"] for r in rows} == {"two", "v"}
    assert all(r["status"] == "converged" for r in rows)
    assert all(0.0 < r["rho_m"] < 1.0 for r in rows)
    hist = report["residual_histories"]
    assert set(hist) == {"two-nu1", "two-nu2", "v-nu1", "v-nu2"}
    assert all(len(v) >= 2 for v in hist.values())


def test_mg_run_divergence_exit_code(tmp_path):
    out = tmp_path / "run.csv"
    code = run_cli(["mg-run", "--scheme", "qdr", "--n", "9", "--nu", "1",
                    "--omega", "5.0", "--resolution", "27", "--out", str(out)])
    assert code == 2
    rows = read_csv(str(out))
    assert all(r["status"] == "diverged" for r in rows)
    assert all(r["rho_m"] == "nan" for r in rows)


def test_compare_periodic_check_passes(tmp_path):
    out = tmp_path / "cmp.json"
    code = run_cli(["compare", "--scheme", "qdr", "--n", "9", "--nu", "1",
                    "--resolution", "27", "--format", "json", "--out", str(out)])
    assert code == 0
    report = read_json(str(out))
    check = report["periodic_check"]
    assert check["pass"] is True
    assert check["gap"] <= 0.01
    assert check["n"] == 9


def test_selftest_passes(tmp_path):
    out = tmp_path / "self.csv"
    assert run_cli(["selftest", "--out", str(out)]) == 0
    rows = read_csv(str(out))
    assert len(rows) == 5
    assert all(r["status"] == "pass" for r in rows)
    names = {r["check"] for r in rows}
    assert "periodic-equivalence" in names and "cost-ratio" in names


def test_csv_goes_to_stdout_by_default(capsys):
    code = run_cli(["twogrid-lfa", "--scheme", "quzawa", "--transfer", "r9",
                    "--nu", "1", "--resolution", "27"])
    assert code == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and rows[0]["scheme"] == "quzawa"


def test_outputs_are_byte_reproducible(tmp_path):
    out = tmp_path / "rep.json"
    args = ["mg-run", "--scheme", "qibsr", "--n", "9", "--nu", "1",
            "--resolution", "27", "--format", "json", "--out", str(out)]
    assert run_cli(args) == 0
    first = out.read_bytes()
    assert run_cli(args) == 0
    assert out.read_bytes() == first
