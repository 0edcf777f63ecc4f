import json
import os

import pytest
from hypothesis import given, settings, strategies as st

from stefan_confluence import cli


def _write(tmp_path, text, name="s.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_minimal_config_defaults(tmp_path):
    sc = cli.load_scenario(_write(tmp_path, "[scenario]\nkind = manufactured-symmetric\n"))
    assert sc == cli.Scenario()
    assert sc.eps == (0.1, 0.07, 0.05, 0.035)
    assert sc.grid["cells_per_eps"] == 8


@pytest.mark.parametrize("text, message", [
    ("[scenario]\nR1 = 2\nR2 = 1\n", "R1 < R2 violated"),
    ("[scenario]\nfoo = 1\n", "unknown key: foo"),
    ("[extra]\nx = 1\n", "unknown section: extra"),
    ("[scenario]\nR1 = abc\n", "key R1: expected float"),
    ("[grid]\ntau_nodes = 1.5\n", "key tau_nodes: expected int"),
    ("[scenario]\nR1 = 0.5\n", "R1 >= 1 violated"),
    ("[scenario]\nt1 = 0\n", "t1 > 0 violated"),
    ("[scenario]\neps = 0.2\n", "eps <= (R2-R1)/20 violated"),
    ("[scenario]\nkind = spiral\n", "kind must be one of"),
])
def test_config_errors(tmp_path, text, message):
    with pytest.raises(cli.ConfigError) as err:
        cli.load_scenario(_write(tmp_path, text))
    assert message in str(err.value)


def test_missing_file():
    with pytest.raises(cli.ConfigError):
        cli.load_scenario("/nonexistent/s.ini")


@given(st.sampled_from(cli.KINDS), st.floats(1.0, 2.0), st.floats(1.0, 3.0),
       st.floats(0.1, 2.0), st.integers(0, 2 ** 31), st.lists(st.floats(0.1, 1.0), min_size=1,
                                                              max_size=4))
@settings(max_examples=40, deadline=None)
def test_config_echo_roundtrip(kind, r1, length, t1, seed, fracs):
    eps = tuple(f * length / 20.0 for f in fracs)
    sc = cli.validate(cli.Scenario(kind=kind, R1=r1, R2=r1 + length, t1=t1, eps=eps,
                                   seed=seed))
    assert cli.parse_scenario(sc.to_ini()) == sc


def test_main_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path, "[scenario]\nfoo = 1\n")
    assert cli.main(["tables", "--config", bad, "--out", str(tmp_path / "o")]) == 2
    assert "unknown key: foo" in capsys.readouterr().err
    # a stage without its declared input
    assert cli.main(["pde", "--out", str(tmp_path / "empty")]) == 2
    man = json.loads((tmp_path / "empty" / "MANIFEST").read_text())
    assert man["status"] == "incomplete"
    assert man["stages"]["pde"]["inputs"] == ["tables.csv"]


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = out / "s.ini"
    cfg.write_text("[scenario]\nkind = manufactured-asymmetric\neps = 0.1 0.08 0.064\n"
                   "[grid]\ntable_points = 200\ntau_nodes = 8000\n")
    sc = cli.load_scenario(str(cfg))
    code = cli.run_pipeline(sc, str(out / "o"), ["tables", "interaction", "stefan", "ansatz",
                                                 "report"])
    return code, out / "o"


def test_partial_pipeline_artifacts(small_run):
    code, out = small_run
    assert code == 0
    man = json.loads((out / "MANIFEST").read_text())
    for f in man["files"]:
        assert (out / f).is_file()
    assert man["status"] == "incomplete"  # not every stage ran
    rep = json.loads((out / "report.json").read_text())
    assert set(rep["discrepancy"]) == {"btilde_closed_form", "beta_limit", "C_Omega_limit"}
    assert cli.parse_scenario(rep["config_text"]).as_dict() == rep["config"]
    assert rep["stages"]["ansatz"]["velocity_sum"]["relative_to_speed"] <= 1e-3
    assert "timing" not in rep


def test_stage_standalone_from_artifacts(small_run, tmp_path):
    _, out = small_run
    sc = cli.parse_scenario("[scenario]\nkind = manufactured-asymmetric\n"
                            "[grid]\ntau_nodes = 8000\n")
    target = tmp_path / "o"
    target.mkdir()
    (target / "tables.csv").write_bytes((out / "tables.csv").read_bytes())
    assert cli.run_pipeline(sc, str(target), ["interaction"]) == 0
    man = json.loads((target / "MANIFEST").read_text())
    assert man["stages"]["interaction"]["inputs"] == ["tables.csv"]


def test_interrupt_marks_manifest(tmp_path, monkeypatch):
    def boom(run):
        raise KeyboardInterrupt
    monkeypatch.setitem(cli.STAGE_FUNCS, "interaction", boom)
    sc = cli.parse_scenario("[grid]\ntable_points = 200\n")
    code = cli.run_pipeline(sc, str(tmp_path), ["tables", "interaction"])
    assert code == cli.EXIT_PARTIAL
    man = json.loads((tmp_path / "MANIFEST").read_text())
    assert man["status"] == "incomplete"
    assert "tables.csv" in man["files"]
    assert os.path.isfile(tmp_path / "tables.csv")


def test_numerical_failure_exit(tmp_path, monkeypatch):
    from stefan_confluence.stefan import NoContactError

    def fail(run):
        raise NoContactError("no contact in horizon")
    monkeypatch.setitem(cli.STAGE_FUNCS, "stefan", fail)
    sc = cli.parse_scenario("[scenario]\nkind = solved\n")
    assert cli.run_pipeline(sc, str(tmp_path), ["stefan"]) == cli.EXIT_NUMERICAL
    assert "no contact" in json.loads((tmp_path / "stefan.json").read_text())["error"]


def test_report_requires_a_stage(tmp_path):
    sc = cli.Scenario()
    assert cli.run_pipeline(sc, str(tmp_path), ["report"]) == cli.EXIT_CONFIG
