import csv
import json
import math

import numpy as np
import pytest

from gradlab.cli import main
from gradlab.exceptions import UnknownPresetError
from gradlab.experiment import run_experiment
from gradlab.presets import preset, preset_names

REQUIRED = {"prop41-i", "prop41-ii", "prop41-iii", "hr-square", "hr-interval", "zelenyak",
            "slow-decay", "lojasiewicz-flat", "perturbed-alpha3", "oracle-match",
            "energy-identity"}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(p)


def _small_config(**over):
    cfg = {"id": "small", "domain": "interval", "n_modes": 8,
           "flow": {"kind": "nonlocal_cubic", "l": 2},
           "initial": [[1, 0.1], [2, 0.05]],
           "integrator": {"dt": 1e-2, "t_end": 2.0},
           "analyses": [{"type": "oracle_match", "tol": 1e-6}]}
    cfg.update(over)
    return cfg


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    names = set(capsys.readouterr().out.split())
    assert REQUIRED <= names


def test_preset_pinning():
    cfg = preset("prop41-ii")
    assert cfg["domain"] == "interval" and cfg["flow"]["l"] == 1
    assert cfg["initial"] == [[1, 0.3]] and cfg["integrator"]["t_end"] == 1e4
    cfg = preset("perturbed-alpha3")
    assert cfg["flow"]["h"] == {"power_law": 3.0} and cfg["flow"]["forcing"] == "linear"
    assert preset("prop41-ii") is not preset("prop41-ii")


def test_unknown_preset(capsys):
    with pytest.raises(UnknownPresetError):
        preset("nope")
    assert main(["preset", "nope"]) == 2
    assert "nope" in capsys.readouterr().err


def test_usage_error():
    assert main(["frobnicate"]) == 2
    assert main(["run"]) == 2


def test_unknown_flow_is_config_error(tmp_path, capsys):
    cfg = _small_config(flow={"kind": "nonsense"})
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "flow.kind" in err and "nonsense" in err


def test_malformed_json_reports_line(tmp_path, capsys):
    path = _write(tmp_path, '{\n  "id": "x",\n  "flow": {,}\n}')
    assert main(["run", "--config", path]) == 2
    assert "line 3" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_bad_mode_is_config_error(tmp_path, capsys):
    cfg = _small_config(initial=[[99, 1.0]])
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    assert "initial[0]" in capsys.readouterr().err


def test_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, _small_config()), "--out", str(out)]) == 0
    report = json.loads((out / "small.json").read_text())
    assert report["schema_version"] == 1 and report["passed"]
    for a in report["assertions"]:
        assert {"name", "measured", "tolerance", "passed"} <= set(a)
    rows = list(csv.reader((out / "small.csv").open()))
    assert rows[0] == ["t", "V", "ut_norm"] + [f"a_{k}" for k in range(1, 9)]
    assert len(rows) == 202
    assert float(rows[1][3]) == 0.1
    assert (out / "small.log").exists()
    assert not [p for p in out.iterdir() if p.name.startswith(".")]


def test_csv_roundtrip_is_lossless(tmp_path):
    out = tmp_path / "out"
    main(["run", "--config", _write(tmp_path, _small_config()), "--out", str(out)])
    data = np.loadtxt(out / "small.csv", delimiter=",", skiprows=1)
    rep = run_experiment(_small_config())
    traj = rep.context.trajectory
    assert np.array_equal(data[:, 0], traj.times)
    assert np.array_equal(data[:, 3:], traj.states)


def test_assertion_failure_exit_code(tmp_path):
    cfg = _small_config(analyses=[{"type": "oracle_match", "tol": 0.0}])
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 1


def test_runtime_error_exit_code(tmp_path, capsys):
    cfg = {"id": "neg", "flow": {"kind": "scalar", "name": "flat_exp", "a0": -1.0}}
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 3
    assert "neg" in capsys.readouterr().err


def test_overrides(tmp_path):
    out = tmp_path / "out"
    path = _write(tmp_path, _small_config())
    assert main(["run", "--config", path, "--out", str(out), "--t-end", "1.0", "--dt", "0.005",
                 "--seed", "3"]) == 0
    report = json.loads((out / "small.json").read_text())
    assert report["config"]["integrator"] == {"dt": 0.005, "t_end": 1.0}
    assert report["config"]["seed"] == 3
    assert math.isclose(report["results"]["trajectory"]["t_final"], 1.0)


def test_determinism(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["preset", "prop41-i", "--out", str(out)]) == 0
        outs.append(out)
    assert (outs[0] / "prop41-i.csv").read_bytes() == (outs[1] / "prop41-i.csv").read_bytes()
    a, b = (json.loads((o / "prop41-i.json").read_text()) for o in outs)
    a.pop("timings"), b.pop("timings")
    assert a == b


def test_preset_prop41_iii_limit_norm(tmp_path):
    assert main(["preset", "prop41-iii", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "prop41-iii.json").read_text())
    (a,) = [a for a in report["assertions"] if a["name"] == "limit_norm"]
    assert a["passed"] and abs(a["measured"] - math.sqrt(3)) <= 1e-8


def test_preset_hr_square(tmp_path):
    assert main(["preset", "hr-square", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "hr-square.json").read_text())
    assert report["results"]["hr_check"]["kernel_dims"] == [1] * 8
    assert not (tmp_path / "hr-square.csv").exists()


def test_preset_dump(capsys):
    assert main(["preset", "oracle-match", "--dump"]) == 0
    assert json.loads(capsys.readouterr().out) == preset("oracle-match")


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(REQUIRED - {"slow-decay"}))
def test_every_preset_passes(name, tmp_path):
    assert main(["preset", name, "--out", str(tmp_path)]) == 0


def test_all_presets_validate():
    from gradlab.experiment import validate_config

    for name in preset_names():
        validate_config(preset(name))
