import json
import os
import subprocess
import sys

import numpy as np
import pytest

from passivegauss.cli import (
    EXIT_DISAGREE,
    EXIT_INVALID,
    EXIT_NOT_ENTANGLABLE,
    EXIT_OK,
    load_state,
    main,
    state_to_json,
    transform_to_json,
)
from passivegauss.core import (
    CovarianceMatrix,
    PassiveTransform,
    direct_sum,
    squeezed,
    symplectic_form,
    thermal,
    two_mode_squeezed,
    vacuum,
)
from passivegauss.entanglement import ModePartition, entanglement_report

TMS_BITS = 1.4426950408889634
HALF_LOG2E = 0.7213475204444817


def write_state(path, gamma):
    path.write_text(json.dumps(state_to_json(gamma)))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out), err


@pytest.fixture
def tms(tmp_path):
    return write_state(tmp_path / "tms.json", two_mode_squeezed(0.5))


@pytest.fixture
def sq_vac(tmp_path):
    return write_state(tmp_path / "sqvac.json", direct_sum(squeezed(0.5), vacuum(1)))


class TestCheck:
    def test_tms(self, capsys, tms):
        code, rep, _ = run_json(capsys, "check", tms, "--partition", "1:1")
        assert code == EXIT_OK
        assert rep["verdict"]["can_entangle"] is True
        assert rep["verdict"]["product"] == pytest.approx(np.exp(-2))
        assert set(rep) == {"command", "input_digest", "validity", "squeezing", "verdict"}

    def test_vacuum(self, capsys, tmp_path):
        code, rep, _ = run_json(capsys, "check", write_state(tmp_path / "v.json", vacuum(2)))
        assert code == EXIT_NOT_ENTANGLABLE
        assert rep["verdict"]["can_entangle"] is False

    def test_wrong_shape(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"n": 2, "ordering": "qqpp", "matrix": np.eye(3).tolist()}))
        code, _, err = run(capsys, "check", p)
        assert code == EXIT_INVALID
        assert "'matrix'" in err and "4 rows" in err

    def test_syntax_error_names_line(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"n": 1,\n "matrix": [[1, 0], [0, 1]\n}')
        code, _, err = run(capsys, "check", p)
        assert code == EXIT_INVALID
        assert "line 3" in err

    @pytest.mark.parametrize(
        "obj,field",
        [
            ({"matrix": [[1, 0], [0, 1]]}, "'n'"),
            ({"n": 1}, "'matrix'"),
            ({"n": 1, "matrix": [[1, 0], [0, "x"]]}, "entry (2, 2)"),
            ({"n": 1, "ordering": "qpqp", "matrix": [[1, 0], [0, 1]]}, "'ordering'"),
        ],
    )
    def test_field_errors(self, capsys, tmp_path, obj, field):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(obj))
        code, _, err = run(capsys, "check", p)
        assert code == EXIT_INVALID
        assert field in err

    def test_unphysical_reports_violation(self, capsys, tmp_path):
        g = np.diag([0.5, 0.5, 1.0, 1.0])
        p = write_state(tmp_path / "u.json", CovarianceMatrix(g))
        code, rep, err = run_json(capsys, "check", p)
        assert code == EXIT_INVALID
        assert rep["validity"]["status"] == "unphysical"
        expected = -np.linalg.eigvalsh(g + 1j * symplectic_form(2))[0]
        assert rep["validity"]["violation"] == pytest.approx(expected, rel=1e-12)
        assert "violation" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "check", tmp_path / "nope.json")
        assert code == EXIT_INVALID

    def test_single_mode_needs_ancilla(self, capsys, tmp_path):
        code, _, err = run(capsys, "check", write_state(tmp_path / "s.json", squeezed(0.4)))
        assert code == EXIT_INVALID
        assert "--ancilla" in err

    def test_bad_partition(self, capsys, tms):
        code, _, _ = run(capsys, "check", tms, "--partition", "1,2")
        assert code == EXIT_INVALID

    def test_digest_stable(self, capsys, tms):
        a = run_json(capsys, "check", tms)[1]["input_digest"]
        b = run_json(capsys, "check", tms)[1]["input_digest"]
        assert a == b and len(a) == 64


class TestEntangle:
    def test_squeezed_vacuum(self, capsys, sq_vac, tmp_path):
        out = tmp_path / "k.json"
        code, text, _ = run(capsys, "entangle", sq_vac, "--out", out)
        assert code == EXIT_OK
        assert "alpha:" in text and "gamma:" in text and "0.721348" in text
        k = json.loads(out.read_text())
        assert set(k) == {"n", "unitary_re", "unitary_im", "real_form"}

    def test_identical_pair_angles(self, capsys, tmp_path):
        p = write_state(tmp_path / "pair.json", direct_sum(squeezed(0.5), squeezed(0.5)))
        code, rep, _ = run_json(capsys, "entangle", p)
        assert code == EXIT_OK
        plan = rep["plan"]
        assert (plan["alpha"], plan["gamma"]) == pytest.approx((np.pi / 2, np.pi / 2), abs=1e-9)
        assert plan["transmissivity"] == pytest.approx(0.5)
        assert rep["achieved"]["log_negativity_bits"] == pytest.approx(TMS_BITS, abs=1e-6)

    def test_thermal_warns(self, capsys, tmp_path):
        out = tmp_path / "k.json"
        p = write_state(tmp_path / "t.json", thermal([1.5, 2.0]))
        code, _, err = run(capsys, "entangle", p, "--out", out)
        assert code == EXIT_NOT_ENTANGLABLE
        assert "warning" in err
        np.testing.assert_array_equal(json.loads(out.read_text())["real_form"], np.eye(4))


class TestApply:
    def test_identity_is_stable(self, capsys, sq_vac, tmp_path):
        kpath = tmp_path / "id.json"
        kpath.write_text(json.dumps(transform_to_json(PassiveTransform.identity(2))))
        out = tmp_path / "out.json"
        assert run(capsys, "apply", sq_vac, kpath, "--out", out)[0] == EXIT_OK
        assert load_state(str(out))[0] == load_state(sq_vac)[0]

    def test_fifty_fifty_matches_plan(self, capsys, sq_vac, tmp_path):
        kpath, out = tmp_path / "k.json", tmp_path / "out.json"
        _, rep, _ = run_json(capsys, "entangle", sq_vac, "--out", kpath)
        assert rep["plan"]["beam_splitter_angle"] == pytest.approx(np.pi / 4)
        run(capsys, "apply", sq_vac, kpath, "--out", out)
        _, after, _ = run_json(capsys, "report", out)
        assert after["achieved"]["log_negativity_bits"] == pytest.approx(HALF_LOG2E, abs=1e-6)

    def test_mismatched_n(self, capsys, sq_vac, tmp_path):
        kpath = tmp_path / "k.json"
        kpath.write_text(json.dumps(transform_to_json(PassiveTransform.identity(3))))
        code, _, err = run(capsys, "apply", sq_vac, kpath)
        assert code == EXIT_INVALID
        assert "3 modes" in err

    def test_inconsistent_transform(self, capsys, sq_vac, tmp_path):
        obj = transform_to_json(PassiveTransform.identity(2))
        obj["real_form"][0][1] = 0.5
        kpath = tmp_path / "k.json"
        kpath.write_text(json.dumps(obj))
        assert run(capsys, "apply", sq_vac, kpath)[0] == EXIT_INVALID

    def test_non_unitary(self, capsys, sq_vac, tmp_path):
        obj = {"n": 2, "unitary_re": [[2, 0], [0, 1]], "unitary_im": [[0, 0], [0, 0]],
               "real_form": np.diag([2.0, 1, 2, 1]).tolist()}
        kpath = tmp_path / "k.json"
        kpath.write_text(json.dumps(obj))
        assert run(capsys, "apply", sq_vac, kpath)[0] == EXIT_INVALID

    def test_stdout(self, capsys, sq_vac, tmp_path):
        kpath = tmp_path / "id.json"
        kpath.write_text(json.dumps(transform_to_json(PassiveTransform.identity(2))))
        code, out, _ = run(capsys, "apply", sq_vac, kpath)
        assert code == EXIT_OK
        assert json.loads(out)["n"] == 2


class TestReport:
    def test_tms(self, capsys, tms):
        code, rep, _ = run_json(capsys, "report", tms)
        assert code == EXIT_OK
        assert rep["achieved"]["log_negativity_bits"] == pytest.approx(TMS_BITS, rel=1e-12)
        assert set(rep) == {"command", "input_digest", "validity", "achieved"}

    def test_vacuum_and_product(self, capsys, tmp_path, sq_vac):
        for p in (write_state(tmp_path / "v.json", vacuum(2)), sq_vac):
            assert run_json(capsys, "report", p)[1]["achieved"]["log_negativity_bits"] == 0.0

    def test_json_contains_human_fields(self, capsys, sq_vac):
        for cmd in ("check", "entangle", "report"):
            _, human, _ = run(capsys, cmd, sq_vac)
            _, rep, _ = run_json(capsys, cmd, sq_vac)
            for line in human.splitlines():
                if line.startswith("      "):
                    continue  # matrix rows
                key = line.strip().split(":")[0]
                if line.startswith("  "):
                    section = next(k for k, v in rep.items() if isinstance(v, dict) and key in v)
                    assert key in rep[section]
                else:
                    assert key in rep

    def test_json_lossless(self, capsys, tmp_path):
        g = direct_sum(squeezed(0.3, 0.7, 1.3), squeezed(0.1, 2.1))
        p = write_state(tmp_path / "g.json", g)
        rep = run_json(capsys, "report", p)[1]
        direct = entanglement_report(g, ModePartition.contiguous(1, 1))
        assert rep["achieved"]["symplectic_spectrum"] == direct.spectrum.tolist()
        assert load_state(p)[0] == g


class TestOracle:
    def test_squeezed_vacuum(self, capsys, sq_vac):
        code, rep, _ = run_json(capsys, "oracle", sq_vac, "--seed", 42, "--samples", 5000)
        assert code == EXIT_OK
        assert abs(rep["oracle"]["difference"]) < 1e-3

    def test_vacuum(self, capsys, tmp_path):
        p = write_state(tmp_path / "v.json", vacuum(2))
        code, rep, _ = run_json(capsys, "oracle", p, "--samples", 500, "--refine", 50)
        assert code == EXIT_OK
        assert rep["oracle"]["best_negativity_bits"] == 0.0
        assert rep["oracle"]["closed_form_bits"] == 0.0

    def test_deterministic(self, capsys, tmp_path):
        p = write_state(tmp_path / "t.json", direct_sum(squeezed(0.4), thermal(1.2), vacuum(1)))
        args = ("oracle", p, "--samples", 1000, "--refine", 100, "--seed", 7)
        a, b = run_json(capsys, *args)[1], run_json(capsys, *args)[1]
        assert a == b

    def test_disagreement_exit_code(self):
        assert EXIT_DISAGREE == 3


class TestMake:
    def test_tms(self, capsys, tmp_path):
        out = tmp_path / "tms.json"
        assert run(capsys, "make", "tms", "--r", 0.5, "--out", out)[0] == EXIT_OK
        assert load_state(str(out))[0] == two_mode_squeezed(0.5)

    def test_thermal_below_one(self, capsys):
        assert run(capsys, "make", "thermal", "--b", 0.5)[0] == EXIT_INVALID

    def test_vacuum(self, capsys):
        code, out, _ = run(capsys, "make", "vacuum", "--n", 3)
        assert code == EXIT_OK
        np.testing.assert_array_equal(json.loads(out)["matrix"], np.eye(6))

    def test_simon_and_ancilla(self, capsys):
        code, out, _ = run(capsys, "make", "simon", "--a", 2, "--b", 2, "--c", 1, "--d", -1)
        assert code == EXIT_OK
        assert json.loads(out)["n"] == 2
        code, out, _ = run(capsys, "make", "squeezed", "--r", 0.2, "--ancilla")
        assert json.loads(out)["n"] == 2

    def test_missing_parameter(self, capsys):
        code, _, err = run(capsys, "make", "squeezed")
        assert code == EXIT_INVALID
        assert "--r" in err

    def test_random_seeded(self, capsys):
        a = run(capsys, "make", "random", "--n", 3, "--seed", 4)[1]
        b = run(capsys, "make", "random", "--n", 3, "--seed", 4)[1]
        assert a == b


def test_module_entry_point(tmp_path):
    p = write_state(tmp_path / "tms.json", two_mode_squeezed(0.5))
    env = dict(os.environ, PYTHONPATH=os.pathsep.join(sys.path))
    proc = subprocess.run(
        [sys.executable, "-m", "passivegauss", "check", p, "--json"], capture_output=True, text=True, env=env
    )
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["verdict"]["can_entangle"] is True
