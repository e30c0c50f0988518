import json
import textwrap

import pytest

from wwlab import io
from wwlab.cli import main
from wwlab.harness import ConfigError, StageError, load_config, recheck_rows, run_experiment, verify_wwl
from wwlab.instances import InstanceSpec, make_circle

CIRCLE = """
[instance]
kind = circle
n = 256

[sweep]
omega_min = 9
omega_max = 100
omega_count = 5
trials = 3

[checks]
weyl_target = 0.5
weyl_tol = 0.1
poincare = true
poincare_rho = 0.5, 1.0
poincare_centers = 4
spectral_function = true
s = 3, 5, 8
frame = true
frame_omega = 25
bernstein = true
gaussian = true
t = 0.01, 0.03
d2t_cap = 6

[output]
dir = out
"""


def write_cfg(tmp_path, text=CIRCLE, name="c.cfg"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def test_config_parsing(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    assert cfg.instance.kind == "circle" and cfg.instance.n == 256
    assert len(cfg.sweep.omega) == 5 and cfg.sweep.omega[0] == pytest.approx(9)
    assert cfg.checks.s_grid == [3, 5, 8] and cfg.checks.poincare
    assert cfg.out_dir == tmp_path / "out"


@pytest.mark.parametrize("edit, msg", [
    (lambda t: t.replace("[sweep]", "[sweeps]"), r"missing section \[sweep\]"),
    (lambda t: t.replace("omega_min = 9\n", ""), "omega"),
    (lambda t: t.replace("kind = circle", "kind = moebius"), "unknown instance kind"),
    (lambda t: t.replace("trials = 3", "trials = 3\nspectrum = guessed"), "spectrum"),
])
def test_config_errors(tmp_path, edit, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(write_cfg(tmp_path, edit(CIRCLE)))


def test_missing_space_file_named(tmp_path, capsys):
    p = write_cfg(tmp_path, CIRCLE.replace("n = 256", "n = 256\nspace_file = data/missing.json"))
    with pytest.raises(ConfigError, match="missing.json"):
        load_config(p)
    assert main(["report", "--config", str(p)]) == 2
    assert "missing.json" in capsys.readouterr().err


def test_verify_wwl_discrete_and_analytic():
    inst = make_circle(512)
    grid = [16, 36, 64, 100]
    for mode in ("discrete", "analytic"):
        rep = verify_wwl(inst, grid, trials=3, spectrum=mode)
        assert rep.gamma is not None and 0 < rep.c < 1
        assert [r.passed for r in rep.rows] == recheck_rows(rep)
        assert set(rep.feasibility) == set(rep.gamma_grid)
    spec_rep = verify_wwl(InstanceSpec("circle", n=512), grid, trials=3)
    assert spec_rep.c == verify_wwl(inst, grid, trials=3).c


def test_verify_wwl_drops_below_resolution():
    inst = make_circle(64)
    with pytest.warns(UserWarning, match="below sampling resolution"):
        rep = verify_wwl(inst, [4, 16, 1e5], trials=2)
    assert rep.dropped == [1e5] and len(rep.rows) == 2


def test_recheck_detects_tampering():
    rep = verify_wwl(make_circle(256), [9, 25, 49], trials=2)
    rep.rows[0].N = 10 ** 6
    assert not recheck_rows(rep)[0]


def test_run_experiment_outputs_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path)
    assert run_experiment(cfg, out=tmp_path / "a") == 0
    assert run_experiment(cfg, out=tmp_path / "b") == 0
    for name in ("report.json", "wwl_table.csv", "feasibility.csv"):
        assert (tmp_path / "a" / name).read_text() == (tmp_path / "b" / name).read_text()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["pass"] and set(rep["checks"]) >= {"weyl", "wwl", "lattice", "gamma_identity", "poincare",
                                                   "spectral_function", "frame", "bernstein", "gaussian"}
    svg = (tmp_path / "a" / "wwl.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_failing_check_gives_nonzero_exit(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE.replace("weyl_target = 0.5", "weyl_target = 2.0"))
    assert run_experiment(cfg, out=tmp_path / "o") == 1
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert not rep["checks"]["weyl"]["pass"] and rep["checks"]["wwl"]["pass"]


def test_stage_failure_is_named(tmp_path):
    # a 5000-point circle exceeds the dense cap: construction stage fails
    cfg = write_cfg(tmp_path, CIRCLE.replace("n = 256", "n = 5000"))
    with pytest.raises(StageError) as e:
        run_experiment(cfg, out=tmp_path / "o")
    assert e.value.stage == "generate"


def test_user_supplied_files(tmp_path):
    inst = make_circle(128)
    sp = io.save_space(inst.space, tmp_path / "space.json")
    io.save_operator(inst.operator, tmp_path / "op.json", sp)
    text = CIRCLE.replace("n = 256", "space_file = space.json\noperator_file = op.json")
    assert run_experiment(write_cfg(tmp_path, text), out=tmp_path / "o") == 0


@pytest.mark.parametrize("verb, extra", [
    ("generate", []), ("spectrum", []), ("lattice", ["--rho", "0.3"]),
    ("poincare", ["--rho", "0.5", "1.0"]), ("heat", []), ("verify-wwl", []), ("report", []),
])
def test_cli_verbs(tmp_path, verb, extra, capsys):
    cfg = write_cfg(tmp_path)
    code = main([verb, "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "3",
                 "--threads", "2", *extra])
    assert code == 0
    if verb == "generate":
        assert (tmp_path / "o" / "space.json").exists() and (tmp_path / "o" / "operator.json").exists()


def test_cli_requires_config():
    with pytest.raises(SystemExit):
        main(["report"])


def test_python_module_entry(tmp_path):
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "wwlab", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify-wwl" in r.stdout
