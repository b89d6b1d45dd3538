import json

import pytest

from gwhf.cli import ExperimentConfig, main
from gwhf.report import read_csv_body, svg_from_summary_csv

SMALL = ["--realizations", "4", "--radii", "2:6:1", "--r-min", "2", "--r-max", "6", "--step", "0.1"]


def test_config_json_round_trip():
    cfg = ExperimentConfig(kernel="laguerre:2", mean="constant:1", radii=[1.0, 2.5], modes=["uncharged"])
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_unknown_config_key_is_a_config_error(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"kernel": "gauss", "bogus": 1}))
    assert main(["varscan", "--config", str(path)]) == 2


def test_chaos_report(capsys):
    assert main(["chaos", "--kernel", "laguerre:1", "--emit-g", "--emit-table"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["integral_g"] == "7/81" and rep["c_table"]["0,0"] == "5/3"
    assert rep["verdict"]["non_hyperuniform"] is True
    assert rep["g"]["rate"] == "2/1"


def test_chaos_rejects_analytic_kernel(capsys):
    assert main(["chaos", "--kernel", "gauss"]) == 2
    assert "analytic" in capsys.readouterr().err


def test_chaos_laguerre3_verdict(capsys):
    assert main(["chaos", "--kernel", "laguerre:3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"]["non_hyperuniform"] and rep["integral_g"] != "0"


def test_validate_kernel(capsys):
    assert main(["validate-kernel", "--kernel", "laguerre:1", "--radius", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_bad_kernel_spec_exit_code():
    assert main(["zeros", "--kernel", "bessel:2"]) == 2


def test_zeros_csv(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zeros", "--kernel", "laguerre:1", "--radius", "2", "--seed", "3", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# kernel: \"laguerre:1\"")
    rows = read_csv_body(text)
    assert rows and all(r["charge"] in ("1", "-1") for r in rows)


def test_sample_json(tmp_path):
    out = tmp_path / "f.json"
    assert main(["sample", "--radius", "1", "--step", "0.25", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kernel"] == "gauss"


def test_varscan_outputs_and_determinism(tmp_path):
    out = tmp_path / "run"
    args = ["varscan", "--kernel", "laguerre:1", "--modes", "charged,uncharged", "--out", str(out), *SMALL]
    assert main(args) == 0
    first = (out / "varscan.csv").read_bytes()
    counts = (out / "varscan_counts.csv").read_bytes()
    assert main(args) == 0
    assert (out / "varscan.csv").read_bytes() == first
    assert (out / "varscan_counts.csv").read_bytes() == counts
    text = first.decode()
    assert "# config:" in text and "# seed: 0" in text and "# version:" in text
    assert (out / "varscan.svg").read_text() == svg_from_summary_csv(text, "laguerre:1, mean none")
    summary = json.loads((out / "varscan.json").read_text())
    assert set(summary["fits"]) == {"charged", "uncharged"}


def test_constant_mean_suppresses_zeros_near_origin(tmp_path):
    args = ["--realizations", "60", "--radii", "0.5:2.5:0.5", "--r-min", "0.5", "--r-max", "2.5", "--step", "0.1"]
    means = {}
    for mean in ("none", "constant:1"):
        out = tmp_path / mean.replace(":", "_")
        assert main(["varscan", "--kernel", "gauss", "--mean", mean, "--out", str(out), *args]) == 0
        rows = read_csv_body((out / "varscan.csv").read_text())
        means[mean] = float(rows[0]["mean"])
    assert means["constant:1"] < means["none"]


def test_spectrogram_gauss_window_reports_zeros_and_maxima(tmp_path):
    out = tmp_path / "s"
    assert main(["spectrogram", "--window", "gauss", "--signal", "tone:1:0:0.5:0", "--out", str(out), *SMALL]) == 0
    modes = {r["mode"] for r in read_csv_body((out / "spectrogram.csv").read_text())}
    assert modes == {"charged", "uncharged", "max"}


def test_unconverged_quadrature_exit_code(tmp_path):
    assert main(["spectrogram", "--window", "hermite1", "--signal", "chirp:1:0:0:40", "--radii", "8:12:1",
                 "--realizations", "2", "--out", str(tmp_path / "q")]) == 3


def test_invalid_config_values():
    assert main(["varscan", "--realizations", "1"]) == 2
    assert main(["varscan", "--modes", "loud"]) == 2


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    for name in ("sample", "zeros", "varscan", "chaos", "spectrogram", "validate-kernel"):
        assert name in text
