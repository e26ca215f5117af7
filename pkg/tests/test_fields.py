import math

import numpy as np
import pytest

import dataclasses

from cat0_engine.errors import InvariantFailure, PreconditionError, ScenarioError
from cat0_engine.fields import (
    OMEGA_MIN,
    OMEGA_NEG_INF,
    BoundarySection,
    InvariantFlat,
    Obstruction,
    OrbitFailure,
    Section,
    UnionFind,
    check_cocycle,
    check_invariant_section,
    classify_function,
    classify_inf,
    dichotomy,
    displacement_minimum,
    holonomy,
    load_scenario,
    minimal_invariant_subfield,
    orbit_average_measure,
    quasi_invariant_busemann_field,
    transport_section,
)
from cat0_engine.boundary import BusemannSum
from cat0_engine.models.base import FullSet, SingletonSet
from cat0_engine.geometry import circumcenter
from cat0_engine.models.euclidean import EuclideanConvex, rotation_2d, translation
from cat0_engine.spaces import sample_points

from conftest import load


def _doc(**overrides):
    doc = {
        "version": 1,
        "omega": ["0"],
        "spaces": {"*": {"kind": "euclidean", "dim": 2}},
        "generators": [],
    }
    doc.update(overrides)
    return doc


# =============================
# Inlezen
# =============================
def test_union_find_keeps_document_order():
    uf = UnionFind(["x", "y", "z", "w"])
    uf.union("w", "y")
    assert uf.classes(["x", "y", "z", "w"]) == [("x",), ("y", "w"), ("z",)]


def test_classes_follow_the_generators():
    scenario = load_scenario(_doc(omega=["0", "1", "2"], generators=[{"name": "t", "pairs": [["0", "1"]]}]))
    assert scenario.classes == (("0", "1"), ("2",))
    assert scenario.root_of("1") == "0"


def test_bundled_scenarios_load():
    screw = load("screw")
    assert screw.classes == (("0", "1", "2", "3"),)
    assert screw.seed == 7
    assert [e.label for e in screw.edges][:2] == ["s:0->1", "s:1->2"]


def test_shape_mismatch_names_the_edge():
    doc = _doc(
        omega=["0", "1"],
        spaces={"0": {"kind": "euclidean", "dim": 2}, "1": {"kind": "tree", "preset": "tripod"}},
        generators=[{"name": "g", "pairs": [["0", "1"]]}],
    )
    with pytest.raises(ScenarioError, match="g:0->1"):
        load_scenario(doc)


def test_unknown_document_key():
    with pytest.raises(ScenarioError, match="colour"):
        load_scenario(_doc(colour="blue"))


def test_pairs_must_be_a_partial_bijection():
    doc = _doc(omega=["0", "1"], generators=[{"name": "g", "pairs": [["0", "1"], ["0", "0"]]}])
    with pytest.raises(ScenarioError, match="bijectie"):
        load_scenario(doc)


def test_stretching_matrix_is_not_an_isometry():
    doc = _doc(generators=[{"name": "g", "pairs": [["0", "0"]], "isometry": {"matrix": [[2, 0], [0, 1]]}}])
    with pytest.raises(ScenarioError, match="isometrie"):
        load_scenario(doc)


def test_unknown_tolerance_in_document():
    with pytest.raises(ScenarioError):
        load_scenario(_doc(tolerances={"bogus": 1}))


# =============================
# Holonomie en secties
# =============================
def test_holonomy_of_translation_pair():
    (h,) = holonomy(load("translation"), "0")
    assert np.allclose(h.apply(np.zeros(2)), [1.0, 0.0])


def test_holonomy_of_screw_cycle():
    (h,) = holonomy(load("screw"), "0")
    assert np.allclose(h.apply(np.zeros(3)), [0.0, 0.0, 1.0])
    assert np.allclose(h.apply(np.array([1.0, 0.0, 0.0])), [0.0, 1.0, 1.0])


def test_tree_without_loops_has_trivial_holonomy():
    scenario = load("two_tripod_ends")
    (h,) = holonomy(scenario, "0")
    tri = scenario.spaces["0"]
    assert h.apply(tri.point("b@2")) == tri.point("b@2")


def test_translation_has_no_invariant_point_section():
    result = transport_section(load("translation"), {"0": np.zeros(2)})
    assert isinstance(result, Obstruction)
    assert result.displacement == pytest.approx(1.0)
    assert result.items[0].loop == "t:1->0"


def test_rotation_fixes_its_center():
    scenario = load("rotation")
    result = transport_section(scenario, {"1": np.array([1.0, 1.0])})
    assert isinstance(result, Section)
    assert np.allclose(result.values["0"], [1.0, 1.0])
    assert check_invariant_section(scenario, result) <= 1e-9


def test_boundary_section_of_translation():
    scenario = load("translation")
    result = transport_section(scenario, {"0": np.array([1.0, 0.0])}, kind="boundary")
    assert isinstance(result, Section)
    assert check_invariant_section(scenario, result) <= 1e-9


def test_check_invariant_section_reports_the_displacement():
    scenario = load("translation")
    s = Section({"0": np.zeros(2), "1": np.array([0.5, 0.0])})
    assert check_invariant_section(scenario, s) == pytest.approx(1.0)


def test_convex_section_residual():
    scenario = load("translation")
    band = EuclideanConvex(halfspaces=((np.array([0.0, 1.0]), 1.0),))
    s = Section({"0": band, "1": band}, "convex")
    assert check_invariant_section(scenario, s) <= 1e-9


# =============================
# Randmaten en Busemann-velden
# =============================
def test_orbit_average_on_tripod_swap():
    scenario = load("tripod_swap")
    tri = scenario.spaces["0"]
    measure = orbit_average_measure(scenario, "0", tri.end("b"))
    atoms = measure["0"]
    assert sorted(xi.ray for _, xi in atoms) == ["b", "c"]
    assert all(w == pytest.approx(0.5) for w, _ in atoms)


def test_orbit_average_fixed_end():
    scenario = load("tripod_swap")
    measure = orbit_average_measure(scenario, "0", scenario.spaces["0"].end("a"))
    assert [(w, xi.ray) for w, xi in measure["0"]] == [(1.0, "a")]


def test_irrational_rotation_orbit_is_too_large():
    scenario = load_scenario(_doc(generators=[{"name": "r", "pairs": [["0", "0"]], "isometry": {"rotation": 1.0}}]))
    result = orbit_average_measure(scenario, "0", np.array([1.0, 0.0]), max_orbit=8)
    assert isinstance(result, OrbitFailure)
    assert result.max_orbit == 8


def _origins(scenario):
    return Section({w: np.zeros(2) for w in scenario.omega})


def test_dirac_measure_gives_quasi_invariant_field():
    scenario = load("translation")
    qfield = quasi_invariant_busemann_field(scenario, scenario.measures, _origins(scenario))
    assert qfield.equation_residual <= 1e-7
    assert qfield.c["t:0->1"] == pytest.approx(0.5)
    assert qfield.additivity_residual <= 1e-9


def test_symmetric_measure_gives_zero_field(rng):
    scenario = load("translation")
    e1 = np.array([1.0, 0.0])
    measure = {w: ((0.5, e1), (0.5, -e1)) for w in scenario.omega}
    qfield = quasi_invariant_busemann_field(scenario, measure, _origins(scenario))
    for _ in range(10):
        assert abs(qfield.f["0"](rng.uniform(-9, 9, 2))) <= 1e-9
    assert all(c == pytest.approx(0.0, abs=1e-12) for c in qfield.c.values())


def test_cocycle_check_rejects_a_non_additive_constant():
    scenario = load("translation")
    qfield = quasi_invariant_busemann_field(scenario, scenario.measures, _origins(scenario))
    broken = dataclasses.replace(qfield, c={**qfield.c, "t:0->1": qfield.c["t:0->1"] + 1.0})
    assert check_cocycle(scenario, qfield, _origins(scenario)) <= 1e-9
    with pytest.raises(InvariantFailure, match="additief"):
        check_cocycle(scenario, broken, _origins(scenario))


def test_measure_must_be_invariant():
    scenario = load("rotation")
    e1 = np.array([1.0, 0.0])
    with pytest.raises(PreconditionError):
        quasi_invariant_busemann_field(scenario, {w: ((1.0, e1),) for w in scenario.omega}, _origins(scenario))


def test_inf_classes_on_translation():
    scenario = load("translation")
    dirac = quasi_invariant_busemann_field(scenario, scenario.measures, _origins(scenario))
    assert {r.tag for r in classify_inf(dirac).values()} == {OMEGA_NEG_INF}
    e1 = np.array([1.0, 0.0])
    balanced = {w: ((0.5, e1), (0.5, -e1)) for w in scenario.omega}
    flat = quasi_invariant_busemann_field(scenario, balanced, _origins(scenario))
    records = classify_inf(flat, budget=6)
    assert {r.tag for r in records.values()} == {OMEGA_MIN}
    assert isinstance(records["0"].argmin, FullSet)


def test_tree_busemann_function_attains_no_minimum(tri):
    f = BusemannSum(tri, tri.point("o"), ((1.0, tri.end("a")),))
    record = classify_function(tri, f, tri.point("o"))
    assert record.tag == OMEGA_NEG_INF
    assert record.value == -math.inf


def test_balanced_tripod_sum_has_a_minimum(tri):
    atoms = tuple((1 / 3, tri.end(r)) for r in "abc")
    record = classify_function(tri, BusemannSum(tri, tri.point("o"), atoms), tri.point("a@3"))
    assert record.tag == OMEGA_MIN
    assert tri.contains(record.argmin, tri.point("o"))


# =============================
# Minimale deelvelden
# =============================
def test_displacement_minimum_of_a_translation_is_everything(plane):
    assert isinstance(displacement_minimum(plane, [translation(plane, [1, 0])], FullSet()), FullSet)


def test_displacement_minimum_balances_the_largest_move(plane):
    gens = [rotation_2d(plane, math.pi), rotation_2d(plane, math.pi / 2, (4.0, 0.0))]
    found = displacement_minimum(plane, gens, FullSet())
    assert isinstance(found, SingletonSet)
    assert np.allclose(found.point, [4 * math.sqrt(2) - 4, 0.0], atol=1e-5)


def test_trivial_holonomy_picks_the_center_of_the_samples():
    scenario = load_scenario(_doc(seed=3))
    X = scenario.spaces["0"]
    found = minimal_invariant_subfield(scenario)
    expected, _ = circumcenter(X, sample_points(X, np.random.default_rng(3), len(X.anchor_points()) + 6))
    assert found.classes["0"].status == "stabilized"
    assert isinstance(found.sets["0"], SingletonSet)
    assert np.allclose(found.sets["0"].point, expected, atol=1e-9)
    assert not np.allclose(found.sets["0"].point, X.origin())


def test_minimal_subfield_of_rotation_is_the_center():
    found = minimal_invariant_subfield(load("rotation"))
    assert found.classes["0"].status == "stabilized"
    for w in ("0", "1"):
        assert isinstance(found.sets[w], SingletonSet)
        assert np.allclose(found.sets[w].point, [1.0, 1.0])


def test_minimal_subfield_of_screw_is_the_axis():
    scenario = load("screw")
    found = minimal_invariant_subfield(scenario)
    X = scenario.spaces["0"]
    assert found.classes["0"].status == "stabilized"
    assert X.contains(found.sets["2"], np.array([0.0, 0.0, 5.0]))
    assert not X.contains(found.sets["2"], np.array([1.0, 0.0, 0.0]))


def test_minimal_subfield_of_translation_escapes():
    found = minimal_invariant_subfield(load("translation"))
    record = found.classes["0"]
    assert record.status == "escape"
    assert record.displacement == pytest.approx(1.0)
    assert record.family is not None


def test_non_invariant_start_is_rejected():
    scenario = load("rotation")
    with pytest.raises(PreconditionError):
        minimal_invariant_subfield(scenario, {"0": SingletonSet(np.zeros(2))})


# =============================
# Dichotomie
# =============================
def test_screw_has_an_invariant_axis():
    scenario = load("screw")
    (outcome,) = dichotomy(scenario)
    assert isinstance(outcome, InvariantFlat)
    assert outcome.dim == 1
    assert outcome.residual < 1e-6
    X = scenario.spaces["0"]
    for w in scenario.omega:
        assert X.contains(outcome.section.values[w], np.array([0.0, 0.0, -3.0]))
        assert not X.contains(outcome.section.values[w], np.array([0.0, 1.0, 0.0]))
    assert check_invariant_section(scenario, outcome.section) < 1e-6


def test_translation_has_an_invariant_boundary_section():
    scenario = load("translation")
    (outcome,) = dichotomy(scenario)
    assert isinstance(outcome, BoundarySection)
    assert outcome.branch == "escape"
    for w in scenario.omega:
        assert scenario.spaces[w].tits_angle(outcome.section.values[w], np.array([1.0, 0.0])) <= 1e-5
    assert check_invariant_section(scenario, outcome.section) < 1e-5


def test_tripod_swap_fixes_the_center():
    scenario = load("tripod_swap")
    (outcome,) = dichotomy(scenario)
    assert isinstance(outcome, InvariantFlat)
    assert outcome.dim == 0
    value = outcome.section.values["0"]
    assert isinstance(value, SingletonSet)
    assert scenario.spaces["0"].format_point(value.point) == "o"


def test_line_translation_is_a_flat_line():
    scenario = load("line_translation")
    (outcome,) = dichotomy(scenario)
    assert isinstance(outcome, InvariantFlat)
    assert outcome.dim == 1
    assert isinstance(outcome.section.values["0"], FullSet)


def test_rotation_flat_is_a_point():
    scenario = load("rotation")
    (outcome,) = dichotomy(scenario)
    assert isinstance(outcome, InvariantFlat)
    assert outcome.dim == 0
    assert np.allclose(outcome.section.values["1"].point, [1.0, 1.0])
    assert outcome.frames["0"].startswith("base=")


def test_line_times_tripod_goes_through_busemann_integration():
    scenario = load("line_tripod")
    (outcome,) = dichotomy(scenario)
    assert isinstance(outcome, BoundarySection)
    assert outcome.branch == "busemann"
    xi = outcome.section.values["0"]
    assert xi.theta == pytest.approx(math.pi / 2)
    assert xi.left is None
    assert xi.right.ray == "a"
    assert outcome.residual < 1e-5


def test_one_outcome_per_class():
    doc = _doc(
        omega=["0", "1", "2"],
        generators=[
            {"name": "t", "pairs": [["0", "1"], ["1", "0"]], "isometry": {"translation": [1, 0]}},
            {"name": "r", "pairs": [["2", "2"]], "isometry": {"rotation": 1.5707963267948966}},
        ],
    )
    outcomes = dichotomy(load_scenario(doc))
    assert [type(o) for o in outcomes] == [BoundarySection, InvariantFlat]
    assert np.allclose(outcomes[1].section.values["2"].point, [0.0, 0.0])
