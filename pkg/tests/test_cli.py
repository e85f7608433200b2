import json
import os
import subprocess
import sys

import pytest

from tractorsuper.cli import ConfigError, RunConfig, main, parse_holonomy, run
from tractorsuper.clifford import Signature
from tractorsuper.exactla import format_scalar
from tractorsuper.forms import so_basis


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_flat_lorentzian_n4(capsys):
    code, rep, _ = run_cli(capsys, "--sig", "1,3", "--holonomy", "trivial", "--profile", "lorentzian")
    assert code == 0
    assert rep["algebra"]["g0"]["dim"] == 15
    assert rep["jacobi"]["flags"] == {"eee": True, "eeo": True, "eoo": True, "ooo": False}
    assert rep["expectations"]["all_match"]


def test_flat_real_n3_swaps_signature(capsys):
    code, rep, _ = run_cli(capsys, "--sig", "1,2", "--holonomy", "trivial", "--field", "real")
    assert code == 0
    assert all(rep["jacobi"]["flags"].values())
    swap = rep["context"]["signature_swap"]
    assert swap["from"] == [2, 3] and swap["to"] == [3, 2]


def test_g2_split_general_profile(capsys):
    code, rep, _ = run_cli(capsys, "--sig", "3,2", "--holonomy", "g2_split", "--profile", "general")
    assert code == 0
    flags = rep["jacobi"]["flags"]
    assert not flags["ooo"] and not flags["eoo"]
    assert rep["algebra"]["g0"]["abelian"]
    assert rep["algebra"]["g0"]["dims_per_grade"] == {"3": 1, "4": 1}
    assert rep["algebra"]["g1"]["real_dim"] == 1


def test_su_runs_fefferman_section(capsys):
    code, rep, _ = run_cli(capsys, "--sig", "1,3", "--holonomy", "su")
    assert code == 0
    assert "fefferman" in rep
    assert rep["expectations"]["all_match"]


def test_report_is_byte_identical(tmp_path):
    paths = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert main(["--sig", "3,2", "--holonomy", "g2_split", "--profile", "general",
                     "--out", str(path)]) == 0
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_scalars_are_strings(capsys):
    _, rep, _ = run_cli(capsys, "--sig", "1,3", "--holonomy", "su")
    for i, j, k, c in rep["algebra"]["brackets"]["nonzero"]:
        assert isinstance(c, str) and "/" in c


@pytest.mark.parametrize("argv", [
    ["--sig", "1,4", "--holonomy", "su"],                      # odd n
    ["--sig", "1,3", "--holonomy", "trivial", "--suite", "fefferman"],
    ["--sig", "2,2", "--holonomy", "g2_split"],
    ["--sig", "1,3", "--holonomy", "nonsense"],
    ["--sig", "x,3"],
    ["--sig", "6,5"],                                           # beyond the cap
    ["--sig", "2,3", "--holonomy", "trivial", "--profile", "lorentzian"],
    ["--sig", "1,3", "--holonomy", "custom"],
])
def test_invalid_configs_exit_2(capsys, argv):
    code, rep, err = run_cli(capsys, *argv)
    assert code == 2 and rep is None
    assert "error" in err


def test_max_dim_override(capsys, monkeypatch):
    monkeypatch.setenv("TRACTOR_MAX_DIM", "5")
    code, _, err = run_cli(capsys, "--sig", "1,3")
    assert code == 2 and "TRACTOR_MAX_DIM" in err
    monkeypatch.setenv("TRACTOR_MAX_DIM", "14")
    RunConfig(sig=(6, 5))       # accepted under the raised cap
    monkeypatch.delenv("TRACTOR_MAX_DIM")
    with pytest.raises(ConfigError):
        RunConfig(sig=(6, 5))


def test_parse_holonomy():
    assert parse_holonomy("ricci_flat:h0=su,k=2") == ("ricci_flat", {"h0": "su", "k": 2})
    assert parse_holonomy("trivial") == ("trivial", {})
    with pytest.raises(ConfigError):
        parse_holonomy("plane_wave:ordering")


def test_custom_generators(tmp_path, capsys):
    sig = Signature(2, 3)
    g = so_basis(sig)[0]
    rows = [[format_scalar(z) for z in r] for r in g.mat.to_rows()]
    path = tmp_path / "gens.json"
    path.write_text(json.dumps({"name": "one_rotation", "tractor_signature": [2, 3], "generators": [rows]}))
    code, rep, _ = run_cli(capsys, "--sig", "1,2", "--holonomy", "custom", "--generators", str(path))
    assert code in (0, 1)
    assert rep["context"]["holonomy_dim"] == 1


def test_expectations_all_match_for_default_run():
    status, report = run(RunConfig(sig=(1, 3)))
    assert status == 0
    checks = report["expectations"]["checks"]
    assert checks and all(c["match"] for c in checks)


def test_module_entry_point():
    env = dict(os.environ)
    out = subprocess.run([sys.executable, "-m", "tractorsuper.cli", "--sig", "1,2", "--suite", "algebra"],
                         capture_output=True, text=True, env=env, check=False)
    assert out.returncode == 0
    assert json.loads(out.stdout)["algebra"]["g0"]["dim"] == 10
