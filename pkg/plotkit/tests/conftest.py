"""Build real sweep CSVs through the routegame CLI once per session."""

import json
import subprocess
import sys

import pytest

GAME = {"p1": 0.3, "p2": 0.75, "t1": 0.25, "t2": 0.7, "c1": 0.1, "c2": 0.4, "V": 1.0, "P": 0.3}
NEGPOS_GAME = {"p1": 0.3, "p2": 0.9, "t1": 0.4, "t2": 0.5, "c1": 0.1, "c2": 0.2, "V": 1.0, "P": 0.2}


def run_sweep(config_path, out_path, *args):
    res = subprocess.run(
        [sys.executable, "-m", "routegame", "sweep", str(config_path), "--out", str(out_path), *args],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    return out_path


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("sweeps")


@pytest.fixture(scope="session")
def game_config(workdir):
    path = workdir / "game.json"
    path.write_text(json.dumps(GAME))
    return path


@pytest.fixture(scope="session")
def negpos_config(workdir):
    path = workdir / "negpos.json"
    path.write_text(json.dumps(NEGPOS_GAME))
    return path


@pytest.fixture(scope="session")
def user_csv(workdir, game_config):
    # xi2 below -0.25 needs t2 > 1, so the bottom band is infeasible.
    return run_sweep(
        game_config,
        workdir / "user.csv",
        "--axis1", "xi1:-0.2:0.2",
        "--axis2", "xi2:-0.3:0.2",
        "--res", "21x21",
        "--i", "1",
        "--s", "0.25",
    )


@pytest.fixture(scope="session")
def policy_csv(workdir, negpos_config):
    return run_sweep(
        negpos_config,
        workdir / "policy.csv",
        "--axis1", "cop_gap:-0.15:0.15",
        "--axis2", "P:0.05:0.55",
        "--res", "15x15",
    )
