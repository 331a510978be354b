import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from g2lab import cli

GOLDEN = Path(__file__).parent / "golden"

R3_CONFIG = """\
# R^3 example, both directions from s0 = 0.5
bianchi = [0, 0, 0]
s0 = 0.5
interval = [0.1, 0.6]
integrator.step = 1e-4
"""

# coarse step for a small frozen file; the independently integrated h drifts
# by ~6e-7 at this step, so that one tolerance is relaxed
GOLDEN_CONFIG = """\
bianchi = [0, 0, 0]
s0 = 0.5
interval = [0.1, 0.6]
integrator.step = 1e-3
tolerances.h_check = 1e-6
"""

SU2_CONFIG = """\
bianchi = [1, 1, 1]
s0 = 0.5
integrator.step = 1e-3
integrator.s_end = 0.6
"""


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("g2lab").joinpath("schemas/report.schema.json").read_text())


def run_cli(tmp_path, command, config, *extra, name="config.txt"):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg = tmp_path / name
    cfg.write_text(config)
    out = tmp_path / "out"
    code = cli.main([command, "--config", str(cfg), "--output", str(out), *extra])
    return code, out


# -- configuration parsing ------------------------------------------------------------


def test_defaults_filled():
    cfg = cli.parse_config("command = flow-run\nbianchi = [1,1,1]\ns0 = 0.5\n")
    assert cfg["integrator.step"] == 1e-4
    assert cfg["H0"] == np.eye(3).tolist()
    assert cfg.tolerances["symmetry"] == 1e-10
    assert cfg.integrator().rho_min == 1e-6


@pytest.mark.parametrize(
    "text,kind",
    [
        ("command = flow-run\nbianchi = [1,1,1]\ns0 = 0.5\nfoo = 1\n", "unknown_key"),
        ("command = flow-run\nbianchi = [1,1,1]\n", "missing_field"),
        ("bianchi = [1,1,1]\ns0 = 0.5\n", "missing_field"),
        ("command = flow-run\nbianchi = [1,1]\ns0 = 0.5\n", "type_error"),
        ("command = flow-run\nbianchi = [1,1,1]\ns0 = \"x\"\n", "type_error"),
        ("command = flow-run\nbianchi = [1,1,1]\ns0 = 0.5\ns0 = 0.4\n", "parse_error"),
        ("command = flow-run\njust some words\n", "parse_error"),
    ],
)
def test_schema_errors(text, kind):
    with pytest.raises(cli.CliError) as info:
        cli.parse_config(text)
    assert info.value.code == cli.EXIT_SCHEMA
    assert info.value.as_dict()["error"]["type"] == kind


@pytest.mark.parametrize(
    "extra",
    [
        "s0 = 0.5\nH0 = [[1, 0.5, 0], [0, 1, 0], [0, 0, 1]]",
        "s0 = 0.5\nH0 = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]",
        "s0 = 0.5\nU0 = [[1, 0, 0], [0, 0, 0], [0, 0, 1]]",
        "s0 = 0",
        "s0 = 1.5",
        "s0 = 0.5\nintegrator.step = -1e-3",
    ],
)
def test_invalid_math(extra):
    with pytest.raises(cli.CliError) as info:
        cli.parse_config(f"command = flow-run\nbianchi = [1,1,1]\n{extra}\n")
    assert info.value.code == cli.EXIT_INVALID


def test_config_hash_is_canonical():
    a = cli.parse_config("command = flow-run\nbianchi = [1,1,1]\ns0 = 0.5\n")
    b = cli.parse_config("s0 = 0.50\n# comment\nbianchi = [1.0, 1, 1]\ncommand = flow-run\n")
    assert cli.config_hash(a) == cli.config_hash(b)
    c = cli.parse_config("command = flow-run\nbianchi = [1,1,1]\ns0 = 0.4\n")
    assert cli.config_hash(a) != cli.config_hash(c)


def test_number_formatting():
    assert cli._fmt(0.1) == "0.10000000000000001"
    assert cli._fmt(-0.0) == "0"
    assert cli._json({"a": float("nan"), "b": [1.0, float("inf")]}) == '{"a": null, "b": [1, null]}'


# -- end to end ---------------------------------------------------------------------------


def test_flow_run_r3(tmp_path, schema):
    code, out = run_cli(tmp_path, "flow-run", R3_CONFIG, "--format", "csv")
    assert code == cli.EXIT_OK
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, schema)
    assert report["passed"]
    assert report["results"]["closed_form_max_relative_error"] < 1e-8
    assert (out / "trajectory.csv").exists()


def test_golden_trajectory(tmp_path):
    code, out = run_cli(tmp_path, "flow-run", GOLDEN_CONFIG, "--format", "csv", "--seed", "7")
    assert code == cli.EXIT_OK
    produced = (out / "trajectory.csv").read_text()
    golden = (GOLDEN / "r3_trajectory.csv").read_text()
    assert produced == golden


def test_outputs_are_byte_identical(tmp_path):
    a = run_cli(tmp_path / "a", "flow-run", SU2_CONFIG, "--format", "json")
    b = run_cli(tmp_path / "b", "flow-run", SU2_CONFIG, "--format", "json")
    for name in ("report.json", "trajectory.json"):
        assert (a[1] / name).read_bytes() == (b[1] / name).read_bytes()
    assert not list(a[1].glob(".tmp-*"))


def test_flow_verify_from_trajectory(tmp_path, schema):
    code, out = run_cli(tmp_path, "flow-run", SU2_CONFIG, "--format", "csv")
    assert code == cli.EXIT_OK
    verify = SU2_CONFIG + f"trajectory = {json.dumps(str(out / 'trajectory.csv'))}\nverify.samples = 5\n"
    code, vout = run_cli(tmp_path, "flow-verify", verify, name="verify.txt")
    report = json.loads((vout / "report.json").read_text())
    jsonschema.validate(report, schema)
    assert code == cli.EXIT_OK, report["checks"]
    assert report["results"]["nearly_parallel"] < 1e-6


def test_flow_verify_json_trajectory(tmp_path):
    code, out = run_cli(tmp_path, "flow-run", SU2_CONFIG, "--format", "json")
    sol_json = cli.load_trajectory(str(out / "trajectory.json"), cli.reduction.BaseGeometry((1, 1, 1)))
    code, out2 = run_cli(tmp_path / "x", "flow-run", SU2_CONFIG, "--format", "csv")
    sol_csv = cli.load_trajectory(str(out2 / "trajectory.csv"), cli.reduction.BaseGeometry((1, 1, 1)))
    np.testing.assert_array_equal(sol_json.U, sol_csv.U)
    np.testing.assert_array_equal(sol_json.H, sol_csv.H)


def test_eta_init_feeds_flow_run(tmp_path, schema):
    config = "bianchi = [1, 1, 1]\ns0 = 0.5\neta = [[1, 0.2, 0], [0, 2, 0.1], [0.3, 0, -1]]\n"
    code, out = run_cli(tmp_path, "eta-init", config)
    assert code == cli.EXIT_OK
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, schema)
    assert report["results"]["round_trip"] < 1e-12
    init = out / "initial.json"
    flow_cfg = f"initial = {json.dumps(str(init))}\nintegrator.step = 1e-3\nintegrator.max_steps = 20\n"
    code, fout = run_cli(tmp_path, "flow-run", flow_cfg, name="flow.txt")
    assert code == cli.EXIT_OK
    fr = json.loads((fout / "report.json").read_text())
    assert fr["results"]["termination"] == "max_steps"


def test_sphere7_analyze(tmp_path, schema):
    config = "sphere7.samples = 20000\nsphere7.classify_samples = 50\nsphere7.zero_samples = 5\n"
    code, out = run_cli(tmp_path, "sphere7-analyze", config)
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, schema)
    assert code == cli.EXIT_OK
    assert report["results"]["hessian_rank"] == 4
    counts = report["results"]["classification_counts"]
    assert counts["critical_zero_degenerate"] == 30
    assert counts["critical_nonzero_associative"] == 2


def test_tolerance_failure_exit_code(tmp_path):
    code, out = run_cli(tmp_path, "flow-run", GOLDEN_CONFIG.replace("1e-6", "1e-8"))
    assert code == cli.EXIT_TOLERANCE
    report = json.loads((out / "report.json").read_text())
    assert not report["passed"]


# -- exit codes and error objects --------------------------------------------------------------


def test_exit_code_unknown_key(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "flow-run", SU2_CONFIG + "nonsense = 3\n")
    assert code == cli.EXIT_SCHEMA
    err = json.loads(capsys.readouterr().err)["error"]
    assert err["type"] == "unknown_key" and err["exit_code"] == cli.EXIT_SCHEMA


def test_exit_code_missing_field(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "flow-run", "bianchi = [1, 1, 1]\n")
    assert code == cli.EXIT_SCHEMA
    assert json.loads(capsys.readouterr().err)["error"]["type"] == "missing_field"


def test_exit_code_invalid_H0(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "flow-run", SU2_CONFIG + "H0 = [[1, 2, 0], [0, 1, 0], [0, 0, 1]]\n")
    assert code == cli.EXIT_INVALID
    assert json.loads(capsys.readouterr().err)["error"]["type"] == "invalid_input"


def test_exit_code_io(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = tmp_path / "c.txt"
    cfg.write_text(SU2_CONFIG)
    code = cli.main(["flow-run", "--config", str(cfg), "--output", str(blocker / "sub")])
    assert code == cli.EXIT_IO
    assert cli.main(["flow-run", "--config", str(tmp_path / "missing.txt")]) == cli.EXIT_IO


def test_no_partial_files_on_failure(tmp_path):
    code, out = run_cli(tmp_path, "flow-run", SU2_CONFIG + "s0 = 0.4\n")
    assert code == cli.EXIT_SCHEMA  # duplicate key
    assert not out.exists()


def test_bad_trajectory_file(tmp_path):
    bad = tmp_path / "t.csv"
    bad.write_text("a,b\n1,2\n")
    config = SU2_CONFIG + f"trajectory = {json.dumps(str(bad))}\n"
    code, _ = run_cli(tmp_path, "flow-verify", config)
    assert code == cli.EXIT_SCHEMA
