import csv
import json

import numpy as np
import pytest

import atomwalk.two_photon as two_photon
from atomwalk.cli import ConfigError, RunConfig, load_config, main


def write_config(path, **kw):
    path.write_text(json.dumps(kw, indent=1))
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_default_pattern_has_twenty_detectors(tmp_path):
    out = tmp_path / "out"
    assert main(["pattern", "--out", str(out)]) == 0
    rows = read_csv(out / "pattern_tau0.csv")
    assert rows[0] == ["x1", "d1", "x2", "d2", "G"]
    assert len(rows) == 1 + 20 * 20
    mantissa = rows[1][4].split("e")[0].lstrip("-").replace(".", "")
    assert len(mantissa) >= 12
    meta = json.loads((out / "pattern.meta.json").read_text())
    assert meta["config"]["steps"] == 9 and meta["config"]["delta"] == 1.0


def test_tau_list_gives_one_file_each(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=2, tau_values=[0, 0.7, 5.0])
    assert main(["pattern", "--config", str(cfg), "--out", str(tmp_path / "o"), "--threads", "2"]) == 0
    names = sorted(p.name for p in (tmp_path / "o").glob("pattern_tau*.csv"))
    assert names == ["pattern_tau0.7.csv", "pattern_tau0.csv", "pattern_tau5.csv"]


def test_tau_override(tmp_path):
    assert main(["pattern", "--out", str(tmp_path), "--tau", "1.5"]) == 0
    assert (tmp_path / "pattern_tau1.5.csv").exists()


def test_invalid_kappa_writes_nothing(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", steps=2, kappa=0)
    out = tmp_path / "o"
    assert main(["pattern", "--config", str(cfg), "--out", str(out)]) != 0
    assert not out.exists()
    assert "kappa" in capsys.readouterr().err


def test_unknown_key_reports_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "steps": 2,\n  "stepz": 3\n}\n')
    with pytest.raises(ConfigError, match=r"c.json:3: unknown key 'stepz'"):
        load_config(p)


def test_syntax_error_reports_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "steps": 2,\n  "kappa": ,\n}\n')
    with pytest.raises(ConfigError, match=r"c.json:3:"):
        load_config(p)


def test_bad_detector_label(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=3, detectors=[["-3,L", "+2,R"]])
    assert main(["gtau", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg = write_config(tmp_path / "d.json", steps=3, detectors=[["-3,Q", "+3,R"]])
    with pytest.raises(ConfigError, match="line|d.json:"):
        load_config(cfg)


def test_gtau_requires_detectors(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=2)
    assert main(["gtau", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_gtau_curve_file(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=3, detectors=[["-3,L", "+3,R"]], tau_points=50)
    out = tmp_path / "o"
    assert main(["gtau", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_csv(out / "gtau_-3L_+3R.csv")
    assert rows[0] == ["tau", "G_nonlinear", "G_linear"]
    taus = np.array([float(r[0]) for r in rows[1:]])
    assert len(taus) == 50 and taus[0] == 0 and taus[-1] == pytest.approx(10.0)


def test_json_format(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=2, format="json", normalization="max")
    out = tmp_path / "o"
    assert main(["pattern", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "pattern_tau0.json").read_text())
    v = np.array(doc["values"])
    assert v.shape == (6, 6) and v.max() == pytest.approx(1.0)
    assert doc["detectors"][0] == "-2,L"


def test_linear_patterns_tau_invariant(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=4, tau_values=[0, 0.7, 5], normalization="max")
    out = tmp_path / "o"
    assert main(["linear", "--config", str(cfg), "--out", str(out)]) == 0
    mats = [np.array([float(r[4]) for r in read_csv(out / f"linear_pattern_tau{t}.csv")[1:]]) for t in ("0", "0.7", "5")]
    for m in mats[1:]:
        np.testing.assert_allclose(m, mats[0], atol=1e-14)


def test_outputs_deterministic(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=3, tau_values=[0, 2], detectors=[["+1,L", "-1,R"]], tau_points=20)
    blobs = []
    for _ in range(2):
        assert main(["pattern", "--config", str(cfg), "--out", str(tmp_path / "same")]) == 0
        assert main(["gtau", "--config", str(cfg), "--out", str(tmp_path / "same")]) == 0
        blobs.append({p.name: p.read_bytes() for p in (tmp_path / "same").iterdir()})
    assert blobs[0] == blobs[1]


def test_metadata_round_trip(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=2, delta=0.0, tau_values=[0.5], detectors=[["-2,L", "+2,R"]])
    out = tmp_path / "o"
    assert main(["gtau", "--config", str(cfg), "--out", str(out)]) == 0
    meta = json.loads((out / "gtau.meta.json").read_text())
    again = RunConfig.from_dict(meta["config"])
    expected = load_config(cfg)
    expected.output_dir = str(out)
    assert again == expected
    assert set(meta) == {"artifact_version", "command", "config", "files"}


def test_validate_passes(tmp_path):
    cfg = write_config(tmp_path / "c.json", steps=3, tau_values=[0, 0.7, 5])
    out = tmp_path / "o"
    assert main(["validate", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "validate_report.json").read_text())
    assert report["passed"]
    names = {c["check"] for c in report["checks"]}
    assert any("unitarity" in n for n in names) and any("oracle" in n for n in names)


def test_validate_catches_corrupted_prefactor(tmp_path, monkeypatch):
    good = two_photon.compute_bb

    def corrupted(params):
        return good(params).scale(1.01)

    monkeypatch.setattr(two_photon, "compute_bb", corrupted)
    cfg = write_config(tmp_path / "c.json", steps=1)
    out = tmp_path / "o"
    assert main(["validate", "--config", str(cfg), "--out", str(out)]) == 1
    report = json.loads((out / "validate_report.json").read_text())
    failed = {c["check"] for c in report["checks"] if not c["passed"]}
    assert "unitarity |P - 1|" in failed
