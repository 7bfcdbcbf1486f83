import json
from pathlib import Path

import pytest

from lkcontrol.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from lkcontrol.config import config_from_dict, family_to_dict
from lkcontrol.samples import beta_driver, mixed_two_mode

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, family, name="cfg.json", **extra):
    doc = family_to_dict(family)
    doc.update(extra)
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def beta_cfg(tmp_path):
    return write_config(tmp_path, beta_driver(0.2, M=6), N=6, grid=32,
                        omega={"form": "linear", "rate": 0.2})


@pytest.fixture
def mixed_cfg(tmp_path):
    fam, _ = mixed_two_mode(0.12, M=6)
    # the recurrence is second order; 128 cells keep its error well under the 1e-6 gap tolerance
    return write_config(tmp_path, fam, N=6, grid=128, omega={"form": "linear", "rate": 0.12},
                        methods=["compositions", "picard", "stepper"])


# alpha

def test_alpha(capsys):
    assert main(["alpha"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "alpha = 0.262109806015551" in out
    assert "1/8 < alpha/2 < 1/7: True" in out


# usage errors

def test_no_command():
    assert main([]) == EXIT_USAGE


def test_missing_config(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == EXIT_USAGE


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["solve", "--config", str(p)]) == EXIT_USAGE


def test_N_above_truncation(tmp_path):
    cfg = write_config(tmp_path, beta_driver(0.2, M=3), N=5)
    assert main(["solve", "--config", cfg]) == EXIT_USAGE


def test_bad_seed(beta_cfg):
    assert main(["solve", "--config", beta_cfg, "--seed", "-1"]) == EXIT_USAGE


def test_verify_without_omega(tmp_path):
    cfg = write_config(tmp_path, beta_driver(0.2, M=3), N=3)
    assert main(["verify-control", "--config", cfg]) == EXIT_USAGE


def test_truncation_pads_with_zero_paths():
    doc = family_to_dict(beta_driver(0.2, M=1))
    doc["truncation"] = 5
    cfg = config_from_dict(doc)
    assert cfg.family.truncation_level == 5
    assert cfg.family.path(5).sup_abs() == 0
    doc["truncation"] = 0
    with pytest.raises(ValueError):
        config_from_dict(doc)


# solve

def test_solve_outputs(mixed_cfg, tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--config", mixed_cfg, "--out", str(out)]) == EXIT_OK
    csv_lines = (out / "coefficients.csv").read_text().splitlines()
    assert csv_lines[0] == "# methods: recurrence,compositions,picard,stepper"
    assert csv_lines[1].startswith("method,t,re_C,im_C,re_c1,im_c1")
    s = json.loads((out / "summary.json").read_text())
    assert s["univalence"] == "certified"
    assert s["omega_0T"] == pytest.approx(0.12)
    assert s["extension"]["certified"]
    assert all(g < 1e-6 for g in s["method_gaps"].values())
    assert all(v["status"] == "certified" for v in s["verdicts"])


def test_solve_above_threshold_inconclusive(beta_cfg, tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--config", beta_cfg, "--out", str(out)]) == EXIT_OK
    s = json.loads((out / "summary.json").read_text())
    assert s["univalence"] == "inconclusive"
    assert "non-univalent" not in json.dumps(s)


def test_solve_is_deterministic(mixed_cfg, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--config", mixed_cfg, "--out", str(a), "--seed", "5"]) == EXIT_OK
    assert main(["solve", "--config", mixed_cfg, "--out", str(b), "--seed", "5"]) == EXIT_OK
    for name in ("coefficients.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


# verify-control

def test_verify_control_passes(beta_cfg, tmp_path, capsys):
    out = tmp_path / "v"
    assert main(["verify-control", "--config", beta_cfg, "--out", str(out)]) == EXIT_OK
    doc = json.loads((out / "verify_control.json").read_text())
    assert doc["status"] == "certified"


def test_verify_control_fails_with_witness(tmp_path, capsys):
    cfg = write_config(tmp_path, beta_driver(0.2, M=4), N=4, n_max=3,
                       omega={"form": "linear", "rate": 0.1}, verify_grid=16, verify_refinement=64)
    out = tmp_path / "v"
    assert main(["verify-control", "--config", cfg, "--out", str(out)]) == EXIT_FAIL
    doc = json.loads((out / "verify_control.json").read_text())
    assert doc["status"] == "violated"
    assert doc["controlled"]["meta"]["failing_n"][0] == 1
    assert "failing n: [1" in capsys.readouterr().out


# boundary

def test_boundary_refuses_large_radius(beta_cfg, tmp_path, capsys):
    # omega(0,T) = 0.2 certifies convergence up to 2.5, plotting is capped at 1.05
    code = main(["boundary", "--config", beta_cfg, "--out", str(tmp_path), "--radii", "1.2"])
    assert code == EXIT_USAGE
    assert "--force" in capsys.readouterr().err


def test_boundary_force(beta_cfg, tmp_path):
    code = main(["boundary", "--config", beta_cfg, "--out", str(tmp_path), "--radii", "1.2", "--force"])
    assert code == EXIT_OK


def test_boundary_outputs(beta_cfg, tmp_path):
    code = main(["boundary", "--config", beta_cfg, "--out", str(tmp_path),
                 "--radii", "0.5", "1.0", "--times", "0.5", "1.0"])
    assert code == EXIT_OK
    rows = (tmp_path / "boundary.csv").read_text().splitlines()
    assert rows[0] == "t,r,k,re_f,im_f"
    assert len(rows) == 1 + 2 * 2 * 512
    for i in range(2):
        svg = (tmp_path / f"boundary_t{i}.svg").read_text()
        assert svg.startswith("<svg") and svg.count("<polyline") == 2


def test_boundary_without_omega_limited_to_disk(tmp_path):
    cfg = write_config(tmp_path, beta_driver(0.2, M=3), N=3, grid=8)
    assert main(["boundary", "--config", cfg, "--out", str(tmp_path), "--radii", "1.01"]) == EXIT_USAGE


# residual

def test_residual_passes(mixed_cfg, tmp_path):
    out = tmp_path / "r"
    assert main(["residual", "--config", mixed_cfg, "--out", str(out)]) == EXIT_OK
    s = json.loads((out / "residual.json").read_text())
    assert s["status"] == "certified"
    assert s["refinement_ratio"] >= 3.5
    assert (out / "residual.csv").exists()


def test_residual_tight_tolerance_fails(tmp_path):
    fam, _ = mixed_two_mode(0.2, M=4)
    cfg = write_config(tmp_path, fam, N=4, grid=8, residual_tol=1e-12)
    assert main(["residual", "--config", cfg, "--out", str(tmp_path)]) == EXIT_FAIL


# shipped configs

@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_load(name):
    cfg = config_from_dict(json.loads((CONFIGS / name).read_text()))
    assert cfg.N <= cfg.family.truncation_level
