import json
import math

import pandas as pd
import pytest

import app
from cat0_engine.errors import UsageError

from conftest import scenario_path


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = app.main([*args, "--out", str(out)])
    return code, out


def test_parse_overrides_accepts_known_keys():
    assert app.parse_overrides(["metric=1e-6", "max_rounds=3"]) == {"metric": 1e-6, "max_rounds": 3.0}


@pytest.mark.parametrize("item", ["bogus=1", "metric", "metric=abc", "metric=-1"])
def test_parse_overrides_rejects(item):
    with pytest.raises(UsageError):
        app.parse_overrides([item])


def test_header_is_always_written(tmp_path):
    code, out = _run(tmp_path, "circumcenter", str(scenario_path("tripod_swap")), "--seed", "9")
    assert code == 0
    header = pd.read_csv(out / "report_header.csv", dtype=str)
    values = dict(zip(header["key"], header["value"]))
    assert values["command"] == "circumcenter"
    assert values["scenario"] == "tripod_swap.json"
    assert values["seed"] == "9"
    assert values["tolerance.metric"] == "1e-09"


def test_tripod_circumcenter_report(tmp_path):
    code, out = _run(tmp_path, "circumcenter", str(scenario_path("tripod_swap")))
    assert code == 0
    row = pd.read_csv(out / "circumcenter.csv").iloc[0]
    # a@2, b@1, c@3: het centrum ligt op c op afstand 0.5 van o
    element, _, offset = row["center"].partition("@")
    assert element == "c"
    assert float(offset) == pytest.approx(0.5, abs=1e-6)
    assert row["radius"] == pytest.approx(2.5)


def test_audit_reports_the_l1_violation(tmp_path):
    code, out = _run(tmp_path, "audit-cat0", str(scenario_path("l1_quadruple")))
    assert code == 0
    quads = pd.read_csv(out / "audit_quadruples.csv")
    assert quads["violation"].max() == pytest.approx(4.0, abs=1e-9)
    triangles = pd.read_csv(out / "audit_triangles.csv")
    assert triangles["violation"].max() <= 1e-9


def test_tits_trace_matches_the_closed_form(tmp_path):
    code, out = _run(tmp_path, "tits", str(scenario_path("tripod_tits")))
    assert code == 0
    df = pd.read_csv(out / "tits_trace.csv")
    assert list(df.columns) == ["pair", "n", "angle_n", "cos_angle_n", "closed_form"]
    for n, cos_value in zip(df["n"], df["cos_angle_n"]):
        expected = (2 * n * n - 4 * (n - 1) ** 2) / (2 * n * n)
        assert cos_value == pytest.approx(expected, abs=1e-9)
    assert df["closed_form"].tolist() == pytest.approx([math.pi] * len(df))


def test_projection_report(tmp_path):
    code, out = _run(tmp_path, "project", str(scenario_path("tripod_swap")))
    assert code == 0
    df = pd.read_csv(out / "projection.csv")
    assert list(df["projection"]) == ["a@1", "a@4"]
    assert list(df["distance"]) == pytest.approx([3.0, 0.0])


def test_two_tripod_ends_exit_incomplete(tmp_path):
    code, out = _run(tmp_path, "angular-circumcenter", str(scenario_path("two_tripod_ends")))
    assert code == 2
    row = pd.read_csv(out / "angular_circumcenter.csv", keep_default_na=False).iloc[0]
    assert row["unique"] == 0
    assert row["radius"] == pytest.approx(math.pi)


def test_limit_set_of_halfspace_march(tmp_path):
    code, out = _run(tmp_path, "limit-set", str(scenario_path("translation")))
    assert code == 0
    assert len(pd.read_csv(out / "limit_set.csv")) == 1
    orbit = pd.read_csv(out / "projection_orbit.csv")
    assert orbit["distance"].is_monotonic_increasing


def test_flat_split_report(tmp_path):
    code, out = _run(tmp_path, "flat-split", str(scenario_path("translation")))
    assert code == 0
    df = pd.read_csv(out / "flat_split.csv")
    counts = df["set"].value_counts().to_dict()
    assert counts == {"F": 16, "A": 16}


def test_dichotomy_report(tmp_path):
    code, out = _run(tmp_path, "dichotomy", str(scenario_path("screw")))
    assert code == 0
    df = pd.read_csv(out / "dichotomy.csv")
    assert list(df["outcome"]) == ["InvariantFlat"]
    assert list(df["detail"]) == ["dim=1"]
    assert len(pd.read_csv(out / "dichotomy_trace.csv")) > 0


def test_reports_are_byte_identical_between_runs(tmp_path):
    path = str(scenario_path("translation"))
    code_a, first = _run(tmp_path, "dichotomy", path, name="a")
    code_b, second = _run(tmp_path, "dichotomy", path, name="b")
    assert code_a == code_b == 0
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_svg_emission(tmp_path):
    path = str(scenario_path("tripod_tits"))
    code, out = _run(tmp_path, "tits", path, "--emit", "svg", name="a")
    assert code == 0
    svg = out / "tits_trace.svg"
    assert svg.read_text(encoding="utf-8").lstrip().startswith("<?xml")
    # de CSV met de geplotte kolommen gaat mee
    assert (out / "tits_trace.csv").exists()
    _, again = _run(tmp_path, "tits", path, "--emit", "svg", name="b")
    assert svg.read_bytes() == (again / "tits_trace.svg").read_bytes()


def test_csv_only_has_no_svg(tmp_path):
    _, out = _run(tmp_path, "tits", str(scenario_path("tripod_tits")))
    assert not list(out.glob("*.svg"))


def test_unknown_tolerance_is_a_usage_error(tmp_path):
    code, _ = _run(tmp_path, "dichotomy", str(scenario_path("screw")), "--tolerance", "nonsense=1")
    assert code == 64


def test_unknown_command_is_a_usage_error(tmp_path):
    code, _ = _run(tmp_path, "explode", str(scenario_path("screw")))
    assert code == 64


def test_tolerance_flag_reaches_the_header(tmp_path):
    code, out = _run(tmp_path, "circumcenter", str(scenario_path("tripod_swap")), "--tolerance", "max_rounds=3")
    assert code == 0
    header = pd.read_csv(out / "report_header.csv", dtype=str)
    assert dict(zip(header["key"], header["value"]))["tolerance.max_rounds"] == "3"


def test_bad_scenario_exits_with_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"version": 1, "omega": ["0"], "spaces": {}, "generators": []}), encoding="utf-8")
    code, _ = _run(tmp_path, "dichotomy", str(bad))
    assert code == 1


def test_missing_scenario_exits_with_error(tmp_path, capsys):
    code, _ = _run(tmp_path, "dichotomy", str(tmp_path / "missing.json"))
    assert code == 1
    assert "missing.json" in capsys.readouterr().err


def test_missing_sample_block_exits_with_error(tmp_path):
    code, _ = _run(tmp_path, "project", str(scenario_path("rotation")))
    assert code == 1
