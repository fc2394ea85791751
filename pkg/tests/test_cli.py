import numpy as np
import pytest

from scrubbot import cli
from scrubbot import fixtures as fx


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_brush_csv(capsys, tmp_path):
    assert cli.run(["brush", "--mu", "0.93", "--ro", "35", "--ri", "25", "--fmax", "11",
                    "--svg", str(tmp_path / "b.svg")]) == 0
    header, rows = csv_rows(capsys.readouterr().out)
    assert header == ["force_N", "moment_uni_Nmm", "moment_cr_Nmm", "moment_backlash_Nmm"]
    last = dict(zip(header, rows[-1]))
    assert float(last["force_N"]) == 11.0
    assert float(last["moment_backlash_Nmm"]) == pytest.approx(50.34, abs=1e-9)
    assert (tmp_path / "b.svg").read_text().startswith("<svg")


def test_dataset_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.run(["dataset", "--seed", "7", "--per-level", "40", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "# seed=7" in text and "version=" in text
    assert len(csv_rows(text)[1]) == 200


@pytest.fixture(scope="module")
def tiny_model(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    data, model = d / "d.csv", d / "m.txt"
    assert cli.run(["dataset", "--seed", "1", "--per-level", "60", "--out", str(data)]) == 0
    assert cli.run(["train", "--data", str(data), "--hidden", "16", "--epochs", "2",
                    "--out", str(model), "--history", str(d / "h.csv")]) == 0
    return model


def test_train_outputs(tiny_model):
    header, rows = csv_rows((tiny_model.parent / "h.csv").read_text())
    assert header == ["epoch", "lr", "train_loss", "val_loss"] and len(rows) == 2
    assert tiny_model.read_text().startswith("scrubbot-iknet 1")


def test_track_and_force(tiny_model, tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert cli.run(["track", "--model", str(tiny_model), "--baseline", str(tiny_model),
                    "--waypoints", "8", "--out", str(out), "--svg", str(tmp_path / "t.svg")]) == 0
    header, rows = csv_rows(out.read_text())
    assert header[0] == "waypoint" and header[-2:] == ["err_mm", "err_deg"] and len(rows) == 8
    assert "baseline" in capsys.readouterr().err
    out = tmp_path / "f.csv"
    assert cli.run(["force", "--model", str(tiny_model), "--steps", "4", "--out", str(out)]) == 0
    header, rows = csv_rows(out.read_text())
    assert header[:5] == ["delta_r", "K", "b", "R2", "gain_err_pct"]
    assert [float(r[0]) for r in rows] == [0, 25, 50, 75]


def test_clean_on_fixtures(capsys, tmp_path):
    d = fx.fixture_dir()
    truth = fx.load_truth()
    assert cli.run(["clean", "--before", str(d / "plate_before.ppm"), "--after", str(d / "plate_after.ppm"),
                    "--surface", "plate", "--mask-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    expected = 100 * (truth["plate_before"] - truth["plate_after"]) / truth["plate_before"]
    assert f"before_px={truth['plate_before']}" in out
    assert f"cleaned_pct={expected:.2f}" in out
    assert (tmp_path / "plate_before_mask.pgm").exists()


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(["brush", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.run(["nosuch"])
    assert exc.value.code == 2
    missing = tmp_path / "missing.csv"
    assert cli.run(["train", "--data", str(missing), "--out", str(tmp_path / "m")]) == 1
    assert str(missing) in capsys.readouterr().err
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
    assert cli.run(["clean", "--before", str(bad), "--after", str(bad), "--surface", "seat"]) == 1


def test_plant_config_flag(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("axial_compliance = 1.0\n")
    out = tmp_path / "d.csv"
    assert cli.run(["dataset", "--per-level", "5", "--plant", str(cfg), "--out", str(out)]) == 0
    cfg.write_text("nonsense\n")
    assert cli.run(["dataset", "--per-level", "5", "--plant", str(cfg), "--out", str(out)]) == 1


def test_report_small(tmp_path, capsys):
    assert cli.run(["report", "--out", str(tmp_path), "--per-level", "60",
                    "--epochs", "2", "--hidden", "16"]) == 0
    for name in ("brush", "dataset", "dataset_baseline", "training", "track", "track_baseline",
                 "force", "clean", "summary"):
        assert (tmp_path / f"{name}.csv").exists(), name
    assert (tmp_path / "model.txt").exists()
    header, rows = csv_rows((tmp_path / "summary.csv").read_text())
    assert header == ["section", "quantity", "value", "reference"]
    assert {r[0] for r in rows} >= {"brush", "learning", "tracking", "force", "cleaning"}
    assert np.isfinite([float(r[2]) for r in rows]).all()
    assert "tracking" in capsys.readouterr().out
