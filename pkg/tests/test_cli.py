import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from dbspace.cli import EXIT_CERT, EXIT_CONFIG, EXIT_FIXTURE, EXIT_OK, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


@pytest.mark.parametrize("name", ["kernel_linear", "classify_pw", "mflat_poly3",
                                  "embed_pw", "riesz_pw", "compare_linear"])
def test_shipped_configs_succeed(capsys, name):
    code, out, _ = _run(capsys, name.split("_")[0], "--config", str(CONFIGS / f"{name}.json"))
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["exitCode"] == EXIT_OK


def test_classify_pw_regime(capsys):
    code, out, _ = _run(capsys, "classify", "--config", str(CONFIGS / "classify_pw.json"))
    assert code == EXIT_OK
    assert json.loads(out)["verdict"] == "R7-regime"


def test_seeded_output_is_byte_identical(capsys, tmp_path):
    cfg = str(CONFIGS / "embed_pw.json")
    _, a, _ = _run(capsys, "embed", "--config", cfg, "--seed", "7")
    _, b, _ = _run(capsys, "embed", "--config", cfg, "--seed", "7")
    _, c, _ = _run(capsys, "embed", "--config", cfg, "--seed", "8")
    assert a == b
    assert a != c


def test_out_directory_and_csv(capsys, tmp_path):
    code, out, _ = _run(capsys, "kernel", "--config", str(CONFIGS / "kernel_linear.json"),
                        "--out", str(tmp_path), "--format", "csv")
    assert code == EXIT_OK
    target = Path(out.strip())
    assert target == tmp_path / "kernel.csv"
    lines = target.read_text().splitlines()
    assert len(lines) > 1 and "," in lines[0]


def test_out_directory_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DBSPACE_OUT", str(tmp_path))
    code, _, _ = _run(capsys, "compare", "--config", str(CONFIGS / "compare_linear.json"))
    assert code == EXIT_OK
    rep = json.loads((tmp_path / "compare.json").read_text())
    assert rep["relation"] == "equivalent"


@pytest.mark.parametrize("data", [
    "{not json",
    {"fixture": "pw", "unknownKey": 1},
    {"fixture": "pw", "seed": -1},
    {"fixture": "pw", "grid": {"y0": 5.0, "ymax": 1.0}},
    {"fixture": "pw", "tolerances": {"identity": -1.0}},
    {"fixture": "pw", "embed": {"kind": "nope"}},
    {"fixture": "no-such-fixture"},
])
def test_config_errors_exit_2(capsys, tmp_path, data):
    code, _, err = _run(capsys, "embed", "--config", _write(tmp_path, "c.json", data))
    assert code == EXIT_CONFIG
    assert "config error" in err


def test_missing_config_file_exit_2(capsys, tmp_path):
    code, _, _ = _run(capsys, "kernel", "--config", str(tmp_path / "absent.json"))
    assert code == EXIT_CONFIG


@pytest.mark.parametrize("fixture", [
    {"expCoeff": 1.0, "scale": [1.0, 0.0], "zeros": [[0.0, 1.0]]},
    {"expCoeff": -1.0, "scale": [1.0, 0.0], "zeros": []},
])
def test_invalid_structure_function_exit_3(capsys, tmp_path, fixture):
    code, _, err = _run(capsys, "kernel",
                        "--config", _write(tmp_path, "c.json", {"fixture": fixture}))
    assert code == EXIT_FIXTURE
    assert "structure function" in err


def test_corrupted_plan_exit_4_names_violation(capsys, tmp_path):
    _, out, _ = _run(capsys, "embed", "--config", str(CONFIGS / "embed_pw.json"))
    plan = json.loads(out)["plan"]
    pts = plan["points"]
    pts[1], pts[2] = pts[2], pts[1]
    cfg = {"fixture": "pw", "embed": {"kind": "psi", "plan": {
        "mode": plan["mode"], "points": pts, "params": plan["params"]}}}
    code, out, err = _run(capsys, "embed", "--config", _write(tmp_path, "c.json", cfg))
    assert code == EXIT_CERT
    v = json.loads(out)["violation"]
    assert v == {"condition": "i_increasing", "index": 2}
    assert "i_increasing at index 2" in err


def test_python_fallback_when_extension_is_missing():
    # a meta-path hook that refuses the compiled module simulates a missing build
    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'dbspace._ckernels':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n"
        "from dbspace import backend, hb\n"
        "E = hb.builtin_fixture('linear')\n"
        "print(backend.current(), backend.available(), abs(E.theta(2j)))\n"
    )
    env = {k: v for k, v in os.environ.items() if k != "DBSPACE_BACKEND"}
    res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env=env, check=True)
    name, *_ = res.stdout.split()
    assert name == "python"
    assert "['python']" in res.stdout
    assert float(res.stdout.split()[-1]) == pytest.approx(1 / 3)
