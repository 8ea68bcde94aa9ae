import json
import subprocess
import sys

import numpy as np
import pytest

from bosegas.cli import main


def run_cli(args):
    return main(list(args))


def read_rows(path):
    header = None
    rows = []
    comments = []
    for line in open(path):
        line = line.rstrip("\n")
        if line.startswith("#"):
            comments.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return header, rows, comments


def test_density_profile_grid_and_anchor(tmp_path):
    out = tmp_path / "prof.csv"
    assert run_cli(["density-profile", "--out", str(out)]) == 0
    header, rows, comments = read_rows(out)
    assert header == ["x1", "x2", "x3", "density_thermal", "density_with_shift"]
    assert len(rows) == 9  # x in [0, 2] step 0.25
    assert float(rows[0][3]) == pytest.approx(0.0051413938340609065, abs=1e-12)
    assert comments[0].startswith("# bosegas")


def test_density_profile_shift_adds_constant(tmp_path):
    base = tmp_path / "a.csv"
    shifted = tmp_path / "b.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"shift_weight": 1.0}))
    assert run_cli(["density-profile", "--out", str(base)]) == 0
    assert run_cli(["density-profile", "--config", str(cfg), "--out", str(shifted)]) == 0
    _, rows_a, _ = read_rows(base)
    _, rows_b, _ = read_rows(shifted)
    for ra, rb in zip(rows_a, rows_b):
        assert float(rb[4]) == pytest.approx(float(ra[3]) + 1.0, abs=1e-15)


def test_density_profile_json_matches_csv(tmp_path):
    csv_out = tmp_path / "p.csv"
    json_out = tmp_path / "p.json"
    assert run_cli(["density-profile", "--out", str(csv_out)]) == 0
    assert run_cli(["density-profile", "--format", "json", "--out", str(json_out)]) == 0
    _, rows, _ = read_rows(csv_out)
    payload = json.loads(json_out.read_text())
    for csv_row, json_row in zip(rows, payload["rows"]):
        assert [float(v) for v in csv_row] == json_row


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run_cli(["limit-scan", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_phase_scan_monotone_and_boundary(tmp_path):
    out = tmp_path / "scan.csv"
    assert run_cli(["phase-scan", "--out", str(out)]) == 0
    header, rows, _ = read_rows(out)
    occ = [float(r[1]) for r in rows[:-1]]
    assert all(b > a for a, b in zip(occ, occ[1:]))
    boundary = rows[-1]
    assert boundary[0] == "boundary"
    assert boundary[1] == "divergent"
    assert boundary[5] == "divergent"
    assert boundary[6] == "regular"


def test_phase_scan_boundary_extrapolation(tmp_path):
    # occupation of the orthogonal probe extrapolates to the boundary row
    out = tmp_path / "scan.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu_values": [0.9, 0.95, 0.99]}))
    assert run_cli(["phase-scan", "--config", str(cfg), "--out", str(out)]) == 0
    _, rows, _ = read_rows(out)
    mus = [float(r[0]) for r in rows[:-1]]
    occs = [float(r[2]) for r in rows[:-1]]
    boundary_occ = float(rows[-1][2])
    # Richardson-style linear extrapolation in mu to the ground energy
    slope = (occs[-1] - occs[-2]) / (mus[-1] - mus[-2])
    extrapolated = occs[-1] + slope * (1.0 - mus[-1])
    assert abs(extrapolated - boundary_occ) / boundary_occ < 0.01


def test_limit_scan_converged(tmp_path):
    out = tmp_path / "l.csv"
    assert run_cli(["limit-scan", "--out", str(out)]) == 0
    _, rows, comments = read_rows(out)
    devs = [float(r[5]) for r in rows]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert any("verdict = converged" in c for c in comments)


def test_kms_check_exit_codes(tmp_path):
    assert run_cli(["kms-check", "--out", str(tmp_path / "k.csv")]) == 0


def test_cluster_check_trap_flag(tmp_path):
    out = tmp_path / "c.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "trap", "dim": 3, "t_list": [0.0, 5.0]}))
    assert run_cli(["cluster-check", "--config", str(cfg), "--out", str(out)]) == 0
    _, _, comments = read_rows(out)
    assert any("periodic" in c for c in comments)


def test_domain_classify_output(tmp_path):
    out = tmp_path / "d.csv"
    assert run_cli(["domain-classify", "--out", str(out)]) == 0
    _, rows, _ = read_rows(out)
    table = {r[0]: r[1] for r in rows}
    assert table == {"gaussian": "divergent", "first_excited": "regular"}


def test_config_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"no_such_key": 1}))
    assert run_cli(["density-profile", "--config", str(cfg),
                    "--out", str(tmp_path / "x.csv")]) == 2
    cfg.write_text(json.dumps({"x_step": -1.0}))
    assert run_cli(["density-profile", "--config", str(cfg),
                    "--out", str(tmp_path / "x.csv")]) == 2


def test_numerical_error_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"t_list": [0.0, 1e7]}))
    code = run_cli(["cluster-check", "--config", str(cfg),
                    "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_verify_only_subset(tmp_path):
    out = tmp_path / "v.csv"
    assert run_cli(["verify", "--only", "mehler", "--out", str(out)]) == 0
    _, rows, _ = read_rows(out)
    assert [r[0] for r in rows] == ["mehler"]
    assert run_cli(["verify", "--only", "nonexistent", "--out", str(out)]) == 2


def test_verify_mutation_hook_fails(tmp_path):
    out = tmp_path / "v.csv"
    code = run_cli(["verify", "--only", "ccr_weyl", "--only", "kms",
                    "--inject-symplectic-sign-flip", "--out", str(out)])
    assert code == 1
    _, rows, _ = read_rows(out)
    assert all(r[1] == "fail" for r in rows)


def test_console_entry_point(tmp_path):
    out = tmp_path / "d.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "bosegas.cli", "domain-classify", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.exists()


def test_verify_csv_is_parseable(tmp_path):
    import csv
    out = tmp_path / "v.csv"
    assert run_cli(["verify", "--only", "neumann", "--out", str(out)]) == 0
    with open(out) as fh:
        data = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(data))
    assert rows[0] == ["check", "status", "measured", "tolerance", "detail"]
    assert all(len(r) == 5 for r in rows[1:])
