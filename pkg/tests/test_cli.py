"""Command-line interface: config validation, experiment runs, reproducibility."""

import json
import subprocess
import sys

import pytest

from rkmimo.cli import (
    ConfigError,
    expand_cases,
    load_preset,
    main,
    parse_experiment_config,
    preset_names,
)
from rkmimo.flops import flops_count


def _tiny_config(**kw):
    cfg = {
        "name": "tiny",
        "kind": "ber-vs-snr",
        "geometry": "mmimo64",
        "users": [2],
        "snr_db": [0.0, 5.0],
        "iterations": [1, 4],
        "drops": 2,
        "vectors_per_drop": 2,
        "seed": 7,
    }
    cfg.update(kw)
    return cfg


def _write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def test_flops_table_to_stdout(capsys):
    assert main(["flops-table", "--m", "256", "--k", "32", "--t", "64"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "scheme,m,k,t,omega,flops,relaxation_vs_rzf_pct"
    assert len(out) == 8
    cells = {line.split(",")[0]: line.split(",") for line in out[1:]}
    assert cells["MR"][5] == "65472"
    assert cells["RZF"][5] == "1320832"
    assert cells["nRK"][5] == "393695"
    assert cells["RK"][5] == "395711"
    assert cells["GRK"][5] == "1310112"
    assert cells["RSK"][5] == "920576"
    assert cells["TPE"][5] == "1679460"
    assert cells["RSK"][4] == "5"
    assert float(cells["GRK"][6]) == pytest.approx(0.8116, abs=5e-4)


def test_flops_table_to_file(tmp_path):
    out = tmp_path / "table.csv"
    assert main(["flops-table", "--m", "64", "--k", "8", "--t", "12", "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 8
    row = {ln.split(",")[0]: ln.split(",") for ln in lines[1:]}
    assert int(row["RK"][5]) == flops_count("RK", 64, 8, 12)
    assert int(row["TPE"][5]) == flops_count("TPE", 64, 8, 12)


def test_flops_table_rejects_bad_arguments(capsys):
    assert main(["flops-table", "--m", "64", "--k", "8", "--t", "-1"]) == 2
    assert "error:" in capsys.readouterr().err


def test_experiment_run_writes_csv_and_manifest(tmp_path):
    cfg_path = _write_config(tmp_path, _tiny_config())
    out_dir = tmp_path / "out"
    assert main(["ber-vs-snr", "--config", cfg_path, "--out", str(out_dir)]) == 0
    csv_path = out_dir / "tiny.csv"
    man_path = out_dir / "tiny.manifest.json"
    assert csv_path.exists() and man_path.exists()
    text = csv_path.read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0].startswith("scheme,m,k,d,iota,snr_db,iterations,bits,bit_errors,ber,")
    assert len(lines) == 1 + 2 * (2 + 4 * 2)  # two SNRs, baselines once, solvers per T
    assert "\r" not in text
    manifest = json.loads(man_path.read_text(encoding="utf-8"))
    assert manifest["tool"] == "rkmimo"
    assert manifest["kind"] == "ber-vs-snr"
    assert manifest["config"]["name"] == "tiny"
    assert manifest["outputs"]["csv"] == "tiny.csv"
    assert manifest["threads"] == 1


def test_manifest_rerun_is_byte_identical(tmp_path):
    cfg_path = _write_config(tmp_path, _tiny_config())
    first = tmp_path / "a"
    again = tmp_path / "b"
    threaded = tmp_path / "c"
    assert main(["ber-vs-snr", "--config", cfg_path, "--out", str(first)]) == 0
    manifest = str(first / "tiny.manifest.json")
    assert main(["ber-vs-snr", "--config", manifest, "--out", str(again)]) == 0
    assert main(["ber-vs-snr", "--config", manifest, "--out", str(threaded), "--threads", "2"]) == 0
    ref = (first / "tiny.csv").read_bytes()
    assert (again / "tiny.csv").read_bytes() == ref
    assert (threaded / "tiny.csv").read_bytes() == ref


def test_seed_override_changes_the_rows(tmp_path):
    cfg_path = _write_config(tmp_path, _tiny_config())
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["ber-vs-snr", "--config", cfg_path, "--out", str(a)]) == 0
    assert main(["ber-vs-snr", "--config", cfg_path, "--out", str(b), "--seed", "8"]) == 0
    ra = (a / "tiny.csv").read_text(encoding="utf-8")
    rb = (b / "tiny.csv").read_text(encoding="utf-8")
    assert ra != rb
    assert ",7" in ra.splitlines()[1] and ",8" in rb.splitlines()[1]


def test_convergence_kind_must_match_subcommand(tmp_path, capsys):
    cfg_path = _write_config(tmp_path, _tiny_config(kind="convergence"))
    assert main(["ber-vs-snr", "--config", cfg_path, "--out", str(tmp_path / "o")]) == 2
    assert "kind" in capsys.readouterr().err
    assert main(["convergence", "--config", cfg_path, "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize(
    "mutation,field",
    [
        ({"users": None}, "users"),
        ({"bandwidth": 5}, "bandwidth"),
        ({"kind": "throughput"}, "kind"),
        ({"geometry": "ring"}, "geometry"),
        ({"iterations": [4, 2]}, "iterations"),
        ({"iota": [1.5]}, "iota"),
        ({"visibility": [8], "iota": [0.5]}, "visibility"),
        ({"schemes": ["ZF"]}, "schemes"),
        ({"seed": -1}, "seed"),
        ({"snr_db": []}, "snr_db"),
    ],
)
def test_invalid_config_exits_2_and_names_the_field(tmp_path, capsys, mutation, field):
    cfg = _tiny_config()
    cfg.update(mutation)
    if mutation.get("users", "x") is None:
        del cfg["users"]
    cfg_path = _write_config(tmp_path, cfg)
    assert main(["ber-vs-snr", "--config", cfg_path, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert field in err


def test_config_and_preset_are_mutually_exclusive(tmp_path, capsys):
    assert main(["ber-vs-snr", "--out", str(tmp_path)]) == 2
    cfg_path = _write_config(tmp_path, _tiny_config())
    assert main(["ber-vs-snr", "--config", cfg_path, "--preset", "mmimo64-fig4"]) == 2
    assert "--config or --preset" in capsys.readouterr().err


def test_missing_or_malformed_config_file(tmp_path, capsys):
    assert main(["ber-vs-snr", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["ber-vs-snr", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "not found" in err or "invalid JSON" in err


def test_unknown_preset_is_reported(capsys):
    assert main(["ber-vs-snr", "--preset", "mmimo64-fig9"]) == 2
    assert "mmimo64-fig9" in capsys.readouterr().err


def test_bundled_presets_parse_and_expand():
    names = preset_names()
    assert names == ["mmimo64-fig3", "mmimo64-fig4", "xl256-fig5", "xl256-fig6"]
    for name in names:
        resolved = parse_experiment_config(load_preset(name))
        cases = expand_cases(resolved)
        assert len(cases) == 2  # every bundled experiment sweeps one two-point axis
        assert resolved["name"] == name
        geometry = "mmimo64" if name.startswith("mmimo64") else "xl256"
        assert resolved["geometry"] == geometry
        kind = "ber-vs-snr" if "fig4" in name or "fig6" in name else "convergence"
        assert resolved["kind"] == kind
        assert resolved["schemes"] == list(("MR", "RZF", "nRK", "RK", "GRK", "RSK"))


def test_parse_experiment_config_requires_a_json_object():
    with pytest.raises(ConfigError):
        parse_experiment_config(["not", "a", "dict"])


def test_module_entry_point_runs():
    out = subprocess.run(
        [sys.executable, "-m", "rkmimo", "flops-table", "--m", "64", "--k", "8", "--t", "12"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert out.stdout.splitlines()[0].startswith("scheme,")
