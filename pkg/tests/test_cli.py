import json

import numpy as np
import pytest

from trajcert.cli import load_model, main, save_model
from trajcert.errors import InputError
from trajcert.trajectory import LtiModel, read_csv

TABLE = {2: 7.36147, 4: 12.17092, 6: 14.30461, 8: 14.86621, 10: 14.97684, 12: 14.99619, 14: 14.9994, 16: 14.99990}


@pytest.fixture
def files(tmp_path, lyap_system, energy_system, gain_system):
    paths = {}
    for name, model in [("lyap", lyap_system), ("energy", energy_system), ("gain", gain_system)]:
        paths[name] = tmp_path / f"{name}.json"
        save_model(model, paths[name])
    paths["unstable"] = tmp_path / "unstable.json"
    save_model(LtiModel([[0.5, 1.0], [-1.0, 0.5]]), paths["unstable"])
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out else None), err


def sim(capsys, tmp_path, model, name, *extra):
    csv = tmp_path / f"{name}.csv"
    code, rep, _ = run(capsys, "simulate", "--model", model, "--out-csv", csv, *extra)
    assert code == 0, rep
    return csv, rep


def test_simulate(capsys, tmp_path, files):
    csv, rep = sim(capsys, tmp_path, files["lyap"], "a", "--x0", "2,2", "--T", 1, "--dt", 0.01)
    assert rep["output"]["rows"] == 102
    assert set(rep) >= {"command", "input", "certificate", "validation", "oracle", "duration_ms"}
    assert read_csv(csv).num_samples == 102
    csv, _ = sim(capsys, tmp_path, files["gain"], "b", "--input", "step", "--T", 1, "--dt", 0.1)
    assert csv.read_text().splitlines()[0] == "t,x1,x2,u1,z1"
    code, _, err = run(capsys, "simulate", "--model", files["lyap"], "--T", 0.001, "--dt", 0.01, "--out-csv", tmp_path / "c.csv")
    assert code == 1 and "NonPositiveHorizon" in err


def test_model_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"A": [[0, 1],\n [1, 2]')
    with pytest.raises(InputError, match=r":2:"):
        load_model(bad)
    bad.write_text('{"B": [[1]]}')
    with pytest.raises(InputError):
        load_model(bad)


def test_missing_file_exits_1(capsys, tmp_path):
    code, _, err = run(capsys, "lyap", tmp_path / "nope.csv")
    assert code == 1


def test_lyap_with_levelset(capsys, tmp_path, files, lyap_system):
    csv, _ = sim(capsys, tmp_path, files["lyap"], "a", "--x0", "2,2", "--T", 1, "--dt", 0.01)
    ls = tmp_path / "level.csv"
    code, rep, _ = run(capsys, "lyap", csv, "--levelset", 1000, ls, "--model", files["lyap"])
    assert code == 0
    P = np.array(rep["certificate"]["P"])
    assert np.all(np.linalg.eigvalsh(P) > 0)
    assert rep["oracle"]["valid"] and rep["validation"]["violations"] == 0
    pts = np.loadtxt(ls, delimiter=",", skiprows=1)
    assert pts.shape == (360, 2)
    assert np.allclose(np.einsum("ij,jk,ik->i", pts, P, pts), 1000.0)


def test_lyap_exit_codes(capsys, tmp_path, files):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code, _, err = run(capsys, "lyap", empty)
    assert code == 1 and "TooFewSamples" in err
    csv, _ = sim(capsys, tmp_path, files["unstable"], "u", "--x0", "1,0.3", "--T", 10, "--dt", 0.01)
    code, _, err = run(capsys, "lyap", csv)
    assert code == 2 and "Infeasible" in err


def test_lyap_eq(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["lyap"], "a", "--x0", "2,2", "--T", 1, "--dt", 0.01)
    code, rep, _ = run(capsys, "lyap-eq", csv, "--points", 3)
    assert code == 0
    assert rep["certificate"]["times"] == [0.0, 0.5, 1.0]
    assert np.max(np.abs(np.array(rep["certificate"]["P"]) - [[1.8333, 0.5], [0.5, 0.3333]])) <= 2e-2
    code, rep, _ = run(capsys, "lyap-eq", csv, "--points", 3, "--model", files["lyap"])
    assert rep["oracle"]["max_abs_deviation"] <= 1e-9
    code, _, err = run(capsys, "lyap-eq", csv, "--points", 2)
    assert code == 1 and "TooFewSamples" in err
    q = tmp_path / "q.json"
    q.write_text('{"Q": [[2, 0], [0, 2]]}')
    code, rep, _ = run(capsys, "lyap-eq", csv, "--points", 3, "--Q", q, "--model", files["lyap"])
    assert rep["oracle"]["max_abs_deviation"] <= 1e-9
    assert rep["certificate"]["P"][0][0] == pytest.approx(11 / 3)


def test_energy(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["energy"], "e", "--x0", "2,2", "--T", 5, "--dt", 0.1)
    code, rep, _ = run(capsys, "energy", csv, "--x0", "2,2", "--diff", "central", "--model", files["energy"])
    assert code == 0
    assert rep["certificate"]["bound"] == pytest.approx(3.25, rel=0.05)
    assert rep["oracle"]["oracle"] == pytest.approx(3.25)


def test_peak(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["energy"], "p", "--x0", "3,3", "--T", 5, "--dt", 0.1)
    ell = tmp_path / "ell.csv"
    code, rep, _ = run(capsys, "peak", csv, "--diff", "central", "--ellipse", ell, "--model", files["energy"])
    assert code == 0
    assert rep["certificate"]["bound"] == pytest.approx(3.29, abs=0.05)
    assert rep["oracle"]["violations"] == 0 and rep["oracle"]["bound_respected"]
    assert rep["oracle"]["sdp_reference_bound"] == 3.2915
    assert np.loadtxt(ell, delimiter=",", skiprows=1).shape == (360, 2)


def test_gain(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["gain"], "g", "--input", "step", "--T", 16, "--dt", 0.01)
    code, rep, err = run(capsys, "gain", csv, "--model", files["gain"])
    assert code == 0
    assert 14.9 <= rep["certificate"]["gamma"] <= 15.01
    assert rep["oracle"]["oracle"] == pytest.approx(15.0, abs=1e-3)
    assert err.startswith("T=16") and "learned gamma=14.9999" in err


def test_compare_sweep(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["gain"], "g", "--input", "step", "--T", 16, "--dt", 0.01)
    code, rep, _ = run(capsys, "compare", csv, files["gain"], "--which", "gain", "--horizons", "2,4,6,8,10,12,14,16")
    assert code == 0
    rows = rep["oracle"]["gain"]["rows"]
    assert [r["T"] for r in rows] == list(map(float, TABLE))
    for r in rows:
        assert r["learned"] == pytest.approx(TABLE[int(r["T"])], rel=1e-2)


def test_compare_gating_and_mismatch(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["lyap"], "a", "--x0", "2,2", "--T", 1, "--dt", 0.01)
    code, rep, _ = run(capsys, "compare", csv, files["lyap"], "--which", "all")
    assert code == 0
    assert rep["oracle"]["gain"] == {"skipped": "no inputs"}
    assert rep["oracle"]["energy"] == {"skipped": "no outputs"}
    assert rep["oracle"]["lyap-eq"]["abs_deviation"] < 0.05
    scalar = tmp_path / "scalar.json"
    save_model(LtiModel([[-1.0]]), scalar)
    code, _, err = run(capsys, "compare", csv, scalar)
    assert code == 1 and "DimensionMismatch" in err


def test_reports_are_deterministic(capsys, tmp_path, files):
    csv, _ = sim(capsys, tmp_path, files["energy"], "p", "--x0", "3,3", "--T", 5, "--dt", 0.1)
    reps = []
    for _ in range(2):
        code, rep, _ = run(capsys, "--seed", 5, "peak", csv, "--model", files["energy"], "--samples", 10)
        rep.pop("duration_ms")
        reps.append(json.dumps(rep, sort_keys=True))
    assert reps[0] == reps[1]
