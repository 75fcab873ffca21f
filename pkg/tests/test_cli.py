import os
import subprocess
import sys

import numpy as np
import pytest

from steinerflow.cli import main
from steinerflow.gridfn import read_sgf


def run_cli(args):
    return main(list(args))


@pytest.fixture(scope="module")
def exemplar_sgf(tmp_path_factory):
    path = tmp_path_factory.mktemp("sgf") / "u.sgf"
    assert run_cli(["example", "three-mountains", "--p", "2", "--s", "3", "--n", "64", "--out", str(path)]) == 0
    return str(path)


@pytest.fixture(scope="module")
def ring_sgf(tmp_path_factory):
    path = tmp_path_factory.mktemp("sgf") / "ring.sgf"
    assert run_cli(["example", "ring", "--n", "128", "--out", str(path)]) == 0
    return str(path)


class TestExitCodes:
    def test_unknown_command_usage_error(self):
        assert run_cli(["frobnicate"]) == 2

    def test_unknown_flag_usage_error(self, exemplar_sgf):
        assert run_cli(["brock", "--in", exemplar_sgf, "--frob"]) == 2

    def test_missing_file_io_error(self, tmp_path):
        assert run_cli(["symmetrize", "--in", str(tmp_path / "nope.sgf"), "--out", str(tmp_path / "o.sgf")]) == 2

    def test_bad_variant(self, tmp_path):
        assert run_cli(["example", "dodecahedron", "--out", str(tmp_path / "x.sgf")]) == 2


class TestSymmetrize:
    def test_time_zero_identity(self, exemplar_sgf, tmp_path):
        out = tmp_path / "v.sgf"
        assert run_cli(["symmetrize", "--in", exemplar_sgf, "--t", "0", "--axis", "0", "--out", str(out)]) == 0
        u = read_sgf(exemplar_sgf)
        v = read_sgf(str(out))
        assert np.abs(u.values - v.values).max() <= u.sup / 256 + 0.5 * max(u.spacing) * u.lipschitz()

    def test_infinite_time_symmetric(self, exemplar_sgf, tmp_path):
        out = tmp_path / "w.sgf"
        assert run_cli(["symmetrize", "--in", exemplar_sgf, "--t", "inf", "--axis", "0", "--out", str(out)]) == 0
        v = read_sgf(str(out))
        assert np.abs(v.values - np.flip(v.values, axis=0)).max() < 0.1


class TestBatteries:
    def test_properties_pass(self, exemplar_sgf, tmp_path):
        out = tmp_path / "props.csv"
        code = run_cli(["properties", "--in", exemplar_sgf, "--t", "1.5", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.splitlines()[0] == "name,lhs,rhs,slack,pass"
        assert ",false" not in text

    def test_verify_pde_pass(self, exemplar_sgf, tmp_path):
        out = tmp_path / "pde.csv"
        assert run_cli(["verify-pde", "--in", exemplar_sgf, "--out", str(out)]) == 0
        assert ",false" not in out.read_text()

    def test_decompose_csv(self, exemplar_sgf, tmp_path):
        out = tmp_path / "dec.csv"
        assert run_cli(["decompose", "--in", exemplar_sgf, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,center0,center1,r,R,radial_residual,monotone"
        assert len(lines) == 4  # three annuli

    def test_brock_pass_and_fail(self, exemplar_sgf, tmp_path):
        assert run_cli(["brock", "--in", exemplar_sgf, "--axis", "0", "--out", str(tmp_path / "b.csv")]) == 0
        bad = tmp_path / "perturbed.sgf"
        assert run_cli(["example", "perturbed", "--n", "64", "--out", str(bad)]) == 0
        assert run_cli(["brock", "--in", str(bad), "--axis", "0", "--out", str(tmp_path / "bp.csv")]) == 1

    def test_rings(self, ring_sgf, tmp_path):
        out = tmp_path / "rings.csv"
        assert run_cli(["rings", "--in", ring_sgf, "--out", str(out)]) == 0
        text = out.read_text()
        assert "inner_c" in text and "outer_c" in text


class TestDeterminism:
    def test_parallelism_does_not_change_bytes(self, exemplar_sgf, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert run_cli(["properties", "--in", exemplar_sgf, "--t", "1.0", "--jobs", "1", "--out", str(a)]) == 0
        assert run_cli(["properties", "--in", exemplar_sgf, "--t", "1.0", "--jobs", "8", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_threads_fallback(self, exemplar_sgf, tmp_path):
        out = tmp_path / "env.csv"
        env = dict(os.environ, STEINERFLOW_THREADS="4", PYTHONPATH="src")
        proc = subprocess.run(
            [sys.executable, "-m", "steinerflow.cli", "properties", "--in", exemplar_sgf, "--t", "1.0", "--out", str(out)],
            cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
            env=env,
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr


class TestRoundTrip:
    def test_sgf_round_trip_via_cli(self, exemplar_sgf, tmp_path):
        u = read_sgf(exemplar_sgf)
        copy = tmp_path / "copy.sgf"
        from steinerflow.gridfn import write_sgf

        write_sgf(u, str(copy))
        assert copy.read_bytes() == open(exemplar_sgf, "rb").read()
