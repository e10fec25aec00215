"""Command-line entry points: config validation, determinism, exit codes."""

import json

import pytest

from floerlab.cli import ConfigError, RunConfig, main


def _config(tmp_path, name="cfg.json", **overrides):
    body = {"N": [16, 32], "s": [0.75], "suites": ["floer_function"], "seed": 0}
    body.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(body))
    return str(path)


def test_default_config_values():
    cfg = RunConfig()
    assert cfg.N == [16, 32, 64, 128, 256]
    assert cfg.s == [0.6, 0.75, 0.9]
    assert cfg.seed == 0
    assert not cfg.negative_controls


@pytest.mark.parametrize(
    "bad",
    [
        {"N": []},
        {"N": [48]},
        {"N": [8]},
        {"N": [1024]},
        {"s": [0.5]},
        {"s": [1.0]},
        {"s": [0.4, 0.75]},
        {"seed": "zero"},
        {"suites": ["floer_function", "nope"]},
        {"tolerances": 3},
        {"workers": 0},
    ],
)
def test_invalid_settings_rejected(bad):
    with pytest.raises(ConfigError):
        RunConfig(**{**{"N": [16], "s": [0.75]}, **bad})


def test_load_rejects_malformed_and_unknown(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        RunConfig.load(str(broken))
    alien = tmp_path / "alien.json"
    alien.write_text(json.dumps({"N": [16], "verbosity": 3}))
    with pytest.raises(ConfigError, match="verbosity"):
        RunConfig.load(str(alien))
    listy = tmp_path / "list.json"
    listy.write_text(json.dumps([1, 2]))
    with pytest.raises(ConfigError):
        RunConfig.load(str(listy))


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = main(["verify", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_verify_small_config_is_deterministic(tmp_path):
    cfg = _config(tmp_path)
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["verify", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["verify", "--config", cfg, "--out", str(out2)]) == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    report = json.loads(b1)
    assert report["verdict"] == "pass"
    assert list(report["suites"]) == ["floer_function"]
    assert report["suites"]["floer_function"]["verdict"] == "pass"
    assert report["config"]["N"] == [16, 32]


def test_verify_reports_failure_with_exit_1(tmp_path):
    cfg = _config(
        tmp_path,
        suites=["floer_map"],
        tolerances={"chain_rule_tol": 0.0},
    )
    out = tmp_path / "fail.json"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 1
    report = json.loads(out.read_text())
    assert report["verdict"] == "fail"


def test_sweep_rows_and_monotone_inclusion(tmp_path):
    cfg = _config(tmp_path, N=[16, 32, 64], s=[0.75])
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "suite,N,s,quantity,value"
    iota = [
        float(row.split(",")[-1])
        for row in lines[1:]
        if row.split(",")[3] == "inclusion_sigma_min"
    ]
    assert len(iota) == 3
    assert all(b < a for a, b in zip(iota, iota[1:]))
    again = tmp_path / "sweep2.csv"
    assert main(["sweep", "--config", cfg, "--out", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_demo_pullback_prints_sections(capsys):
    assert main(["demo", "pullback"]) == 0
    text = capsys.readouterr().out
    for token in ("Gradient", "Hessian", "kappa", "Fredholm"):
        assert token in text


def test_unknown_demo_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["demo", "nonsense"])
    assert err.value.code == 2


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
