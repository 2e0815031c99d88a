import pytest
import sympy

from conftest import REFERENCE_BASIS_35, appendix, cube_fan, data, polytope, smooth_ids, table1
from toricmds.chow import is_negative_semidefinite_nontrivial, q_matrix
from toricmds.classify import (
    DIVISORIAL,
    FIBER,
    MOV_FACET,
    ConfigurationError,
    TEMPLATES,
    analyze,
    candidate_cone,
    classify,
    cone_conjecture_check,
    detect_ex117,
    detect_thm1,
    detect_thm2,
    emit_cox_presentation,
    equivalent_up_to_renaming,
    gen_family,
    involution_action,
    involutions,
    nef_facet_status,
    testface,
    tiling_explorer,
)
from toricmds.divisors import basis_change
from toricmds.lattice import identity, matmul, matvec

DIM3_EXPECTED = {
    m: method for method, idx in table1()["3"].items() for m in idx
}
SIGNATURES = {"i": (1, 2), "ii": (2, 3), "iii": (2, 3), "iv": (2, 5), "ex117": (3, 9)}


@pytest.mark.parametrize("index", sorted(DIM3_EXPECTED))
def test_dim3_verdicts(index):
    v = classify(data(f"grdb:{index}"), f"grdb:{index}")
    method = DIM3_EXPECTED[index]
    assert v.method == method
    assert v.mds == ("no" if method.startswith("thm2") else "yes")
    assert v.index == index


def test_detectors_on_named_examples():
    assert detect_thm2(data("grdb:21")).case == "i"
    assert detect_thm2(data("grdb:11")).case == "ii"
    assert detect_thm2(data("grdb:23")) is None
    assert detect_thm1(data("grdb:19").relations).case == "i"
    assert detect_thm1(data("grdb:7").relations).case == "ii"
    rels117 = data("grdb:117").relations
    assert detect_thm1(rels117) is None
    m = detect_ex117(rels117)
    assert m.case == "ex117" and (m.role("x1"), m.role("x2"), m.role("x3")) == (0, 1, 2)


@pytest.mark.parametrize("rid", smooth_ids())
def test_thm1_and_thm2_are_exclusive(rid):
    d = data(rid)
    assert not (detect_thm1(d.relations) and detect_thm2(d))


def _relation(collection, target, degree):
    from toricmds.fan import PrimitiveRelation

    rhs = ((target, 1),) if target is not None else ()
    return PrimitiveRelation(tuple(sorted(collection)), rhs, degree)


def test_case_iv_detection_and_chained_targets():
    disjoint = [_relation((0, 1), 4, 1), _relation((2, 3), 5, 1)]
    assert detect_thm1(disjoint).case == "iv"
    same_target = [_relation((0, 1), 4, 1), _relation((2, 3), 4, 1)]
    assert detect_thm1(same_target).case == "iv"
    chained = [_relation((0, 1), 2, 1), _relation((2, 3), 4, 1)]
    assert detect_thm1(chained) is None
    assert detect_ex117(chained).case == "ex117"


def test_case_iii_orientation_search():
    rels = [_relation((0, 1), None, 2), _relation((0, 3), 2, 1), _relation((1, 2), 3, 1)]
    m = detect_thm1(rels)
    assert m.case == "iii"
    assert (m.role("x1"), m.role("x2"), m.role("x3"), m.role("x4")) == (0, 1, 2, 3)
    # a pair set that only looks similar is rejected
    assert detect_thm1(rels[:2] + [_relation((1, 2), 0, 1)]) is None


@pytest.mark.parametrize("index", [19, 7, 20, 22, 6, 16])
def test_presentations_are_homogeneous(index):
    v = classify(data(f"grdb:{index}"))
    pres = v.presentation
    assert pres.is_homogeneous()
    assert (len(pres.extra_vars), len(pres.relations)) == SIGNATURES[pres.case_tag]


def test_presentation_of_index117():
    d = data("grdb:117")
    pres = emit_cox_presentation(detect_ex117(d.relations), d)
    assert pres.needs_normalization and pres.is_homogeneous()
    assert (len(pres.extra_vars), len(pres.relations)) == SIGNATURES["ex117"]
    assert pres.to_json()["normalization_required"] is True


def test_index7_presentation_matches_table_form():
    pres = classify(data("grdb:7")).presentation
    theirs = ["f0 + x5*s2", "f1 + x3*s2 + x5*s1", "f2 + x3*s1"]
    renaming = equivalent_up_to_renaming(
        pres.relations, theirs, ["f1", "f2", "f3", "s1", "s2"], ["f0", "f1", "f2", "s1", "s2"]
    )
    assert renaming is not None
    # the equation becomes f0 x3^2 - f1 x3 x5 + f2 x5^2 under the same renaming
    sub = {sympy.Symbol(a): s * sympy.Symbol(b) for a, (s, b) in renaming.items()}
    mapped = sympy.expand(pres.equation.xreplace(sub))
    target = sympy.sympify("f0*x3**2 - f1*x3*x5 + f2*x5**2")
    assert sympy.expand(mapped - target) == 0 or sympy.expand(mapped + target) == 0


def test_renaming_search_rejects_different_ideals():
    assert equivalent_up_to_renaming(["a + x1*b"], ["a + x2*b"], ["a", "b"], ["a", "b"]) is None


def test_extra_variable_degrees_case_i():
    d = data("grdb:19")
    pres = classify(d).presentation
    x1 = detect_thm1(d.relations).role("x1")
    f2 = next(b for b in pres.buckets if b.name == "f2")
    (name, deg), = pres.extra_vars
    assert deg == tuple(a - b for a, b in zip(f2.degree, d.grading.ray_class(x1)))


def test_templates_are_well_formed():
    for tag, tpl in TEMPLATES.items():
        assert (len(tpl.extras), len(tpl.relations)) == SIGNATURES[tag]


def test_involution_of_index35(index35):
    act = involution_action(index35, (3, 6))
    u = basis_change(index35.grading, REFERENCE_BASIS_35)
    in_reference_basis = matmul(matmul(u, act.matrix), _inverse(u))
    assert in_reference_basis == ((-1, 0, 0), (2, 1, 0), (1, 0, 1))


def _inverse(u):
    m = sympy.Matrix(u).inv()
    return tuple(tuple(int(x) for x in m.row(i)) for i in range(m.rows))


def test_involution_requires_degree_two_pair(index35):
    with pytest.raises(ConfigurationError):
        involution_action(index35, (2, 5))


@pytest.mark.parametrize("rid", smooth_ids())
def test_involutions_square_to_identity(rid):
    d = data(rid)
    for act in involutions(d):
        assert matmul(act.matrix, act.matrix) == identity(d.grading.picard_rank)
        # the pair's own classes always move
        a, _ = act.pair
        assert act.apply(d.grading.ray_class(a)) != d.grading.ray_class(a)


def test_involution_of_cube_is_not_identity():
    d = analyze(cube_fan(3))
    act = involution_action(d, (0, 1))
    g = d.grading
    # sigma(H1) = -H1 + 2 H2 + 2 H3 where Hk are the three rulings
    h = {k: g.ray_class(2 * k) for k in range(3)}
    assert act.apply(h[0]) == tuple(-x + 2 * y + 2 * z for x, y, z in zip(h[0], h[1], h[2]))
    assert act.apply(h[1]) == h[1]


def test_testface_on_worked_example(index35):
    g = index35.grading
    d = {i + 1: g.ray_class(i) for i in range(g.r)}
    res = testface(index35, [d[4], d[2]])
    assert res.passed and res.q.entries == ((-4, 1), (1, -2)) and res.witness == d[5]
    res = testface(index35, [d[3], d[4]])
    assert res.passed and res.witness == d[6] and res.q.entries == ((0, 0), (0, -2))
    assert not testface(index35, [g.anticanonical]).passed


def test_candidate_cone_of_index35(index35):
    g = index35.grading
    invs = involutions(index35)
    cone = candidate_cone(index35, invs)
    d4, d3, d2 = g.ray_class(3), g.ray_class(2), g.ray_class(1)
    expected = sorted([d4, d3, d2, invs[0].apply(d4)])
    assert sorted(cone.rays) == expected
    v = classify(index35, "grdb:35")
    assert v.mds == "yes" and v.method == "testface"
    assert len(v.witness["facets"]) == 4 and all(f["passed"] for f in v.witness["facets"])


def test_testface_certificates_are_sound():
    for rid in appendix():
        v = classify(data(rid), rid)
        for f in v.witness["facets"]:
            nsd, rk = is_negative_semidefinite_nontrivial(f["q"])
            assert nsd and rk == f["rank"] > 0


def test_literal_movable_rays_leave_index133_open():
    v = classify(data("grdb:133"), extended_witnesses=False)
    assert v.mds == "unknown" and v.method == "testface"
    assert classify(data("grdb:133")).mds == "yes"


def test_classify_json_row():
    row = classify(data("grdb:21"), "grdb:21").to_json()
    assert set(row) == {"index", "dim", "mds", "method", "witness"}
    assert row["witness"]["opposite_pairs"]


def test_nef_facet_statuses():
    d = analyze(gen_family(4, 1))
    statuses = sorted(nef_facet_status(d, f) for f in d.nef.facets)
    assert statuses == sorted([FIBER, FIBER, MOV_FACET])
    cube = analyze(cube_fan(3))
    assert all(nef_facet_status(cube, f) == FIBER for f in cube.nef.facets)
    index35 = data("grdb:35")
    assert DIVISORIAL in {nef_facet_status(index35, f) for f in index35.nef.facets}


@pytest.mark.parametrize("n,i", [(4, 0), (4, 1), (4, 2), (5, 0), (5, 1), (5, 2), (5, 3)])
def test_cone_conjecture_family(n, i):
    d = analyze(gen_family(n, i))
    rep = cone_conjecture_check(d)
    assert rep.picard_rank == 3
    assert rep.passed, rep.notes
    assert matvec(rep.h, rep.fixed_class) == rep.fixed_class
    assert d.nef.contains(rep.fixed_class)


def test_cone_conjecture_fails_for_product_of_lines():
    rep = cone_conjecture_check(analyze(cube_fan(4)))
    assert not rep.passed
    assert not rep.hypotheses["other_facets_mov"]
    assert all(s == FIBER for _, s in rep.statuses)


def test_tiling_counts_and_diagnostics():
    d = analyze(gen_family(4, 1))
    rep = cone_conjecture_check(d)
    small = tiling_explorer(rep.phi1, rep.phi2, d.nef, 0)
    assert small.diagnostics["count"] == 2
    assert small.chambers[0][1] == d.nef
    tiling = tiling_explorer(rep.phi1, rep.phi2, d.nef, 5, rep.fixed_class)
    diag = tiling.diagnostics
    assert diag["count"] == 22 and diag["distinct"]
    assert diag["disjoint_interiors"] and diag["adjacent_along_reflecting_walls"]
    assert diag["outer_walls_mov_translates"] and diag["angles_decrease"]


def test_family_generator():
    p = gen_family(4, 0)
    assert p.dim == 4 and len(p.vertices) == 7
    rels = analyze(p).relations
    # product of two lines and a plane: two opposite pairs and a triple summing to zero
    shape = sorted((r.k, r.degree, r.rhs) for r in rels)
    assert shape == [(2, 2, ()), (2, 2, ()), (3, 3, ())]
    with pytest.raises(ValueError):
        gen_family(4, 3)
