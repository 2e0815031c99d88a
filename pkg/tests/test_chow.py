import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import data, polytope, simplex, smooth_ids
from toricmds.chow import (
    SymmetricForm,
    form_rank,
    intersect_divisors,
    intersection_number,
    intersection_of_classes,
    is_negative_semidefinite_nontrivial,
    multiply,
    nef_volume_oracle,
    q_matrix,
    unit_cycle,
)
from toricmds.fan import FanError, face_fan
from toricmds.lattice import det, dot, rank


def ldl_nsd(rows):
    """Independent NSD oracle: symmetric Gaussian elimination with pivoting.

    A symmetric matrix is negative semidefinite iff elimination on -q never
    meets a negative pivot, and a zero pivot forces its whole row to vanish.
    """
    a = [[Fraction(-x) for x in r] for r in rows]
    active = list(range(len(a)))
    while active:
        # pick the largest remaining diagonal entry as pivot
        p = max(active, key=lambda i: a[i][i])
        if a[p][p] < 0:
            return False
        if a[p][p] == 0:
            # all diagonals are <= 0 here; positive semidefinite needs zero rows
            return all(a[i][j] == 0 for i in active for j in active)
        active.remove(p)
        for i in active:
            f = a[i][p] / a[p][p]
            for j in active:
                a[i][j] -= f * a[p][j]
    return True


def test_index35_intersection_numbers(index35):
    fan = index35.fan
    assert intersection_number(fan, [3, 3, 3, 3]) == -8
    assert intersection_number(fan, [1, 1, 2, 3]) == 1
    assert intersection_number(fan, [0, 1, 2, 3]) == 1


def test_projective_space_normalization():
    fan = face_fan(simplex(3))
    assert intersection_number(fan, [0, 1, 2]) == 1
    assert intersection_number(fan, [0, 0, 0]) == 1
    assert intersect_divisors(fan, [[1, 1, 1, 1]] * 3) == 64


@pytest.mark.parametrize("rid", smooth_ids())
def test_maximal_cones_have_degree_one(rid):
    d = data(rid)
    for cone in d.fan.maximal_cones:
        assert intersection_number(d.fan, sorted(cone)) == 1


@pytest.mark.parametrize("rid", smooth_ids())
def test_stanley_reisner_vanishing(rid):
    d = data(rid)
    n = d.polytope.dim
    for rel in d.relations:
        coll = list(rel.collection)
        if len(coll) > n:
            continue
        pad = [coll[0]] * (n - len(coll))
        assert intersection_number(d.fan, coll + pad) == 0


@pytest.mark.parametrize("rid", smooth_ids())
def test_top_powers_match_volume_oracle(rid):
    d = data(rid)
    g = d.grading
    n = d.polytope.dim
    for cls in (g.anticanonical,) + d.nef.rays:
        assert intersection_of_classes(g, d.fan, [cls] * n) == nef_volume_oracle(d.polytope, g, d.nef, cls)


def test_volume_oracle_rejects_non_nef(index35):
    g = index35.grading
    bad = next(w for w in g.classes if not index35.nef.contains(w))
    with pytest.raises(ValueError):
        nef_volume_oracle(index35.polytope, g, index35.nef, bad)
    assert nef_volume_oracle(index35.polytope, g, index35.nef, (0, 0, 0)) == 0


def _random_divisor(rng, r):
    return [rng.randint(-2, 2) for _ in range(r)]


@pytest.mark.parametrize("rid", ["grdb:35", "grdb:54", "grdb:10", "grdb:117"])
def test_linear_equivalence_invariance(rid):
    d = data(rid)
    rng = random.Random(rid)
    n, r = d.polytope.dim, d.grading.r
    for _ in range(10):
        divs = [_random_divisor(rng, r) for _ in range(n)]
        base = intersect_divisors(d.fan, divs)
        m = [rng.randint(-2, 2) for _ in range(n)]
        principal = [dot(m, v) for v in d.fan.rays]
        slot = rng.randrange(n)
        moved = [list(x) for x in divs]
        moved[slot] = [a + b for a, b in zip(moved[slot], principal)]
        assert intersect_divisors(d.fan, moved) == base


@pytest.mark.parametrize("rid", ["grdb:35", "grdb:33", "grdb:16"])
def test_symmetry_and_multilinearity(rid):
    d = data(rid)
    rng = random.Random(7)
    n, r = d.polytope.dim, d.grading.r
    for _ in range(5):
        divs = [_random_divisor(rng, r) for _ in range(n)]
        value = intersect_divisors(d.fan, divs)
        perm = list(divs)
        rng.shuffle(perm)
        assert intersect_divisors(d.fan, perm) == value
        extra = _random_divisor(rng, r)
        summed = [[a + b for a, b in zip(divs[0], extra)]] + divs[1:]
        assert intersect_divisors(d.fan, summed) == value + intersect_divisors(d.fan, [extra] + divs[1:])


def test_lift_independence(index35):
    g = index35.grading
    rays = index35.fan.rays
    rng = random.Random(3)
    classes = [g.ray_class(i) for i in (4, 3, 3, 1)]
    value = intersection_of_classes(g, index35.fan, classes)
    for _ in range(5):
        lifts = []
        for c in classes:
            m = [rng.randint(-3, 3) for _ in range(4)]
            lifts.append([a + dot(m, v) for a, v in zip(g.lift_class(c), rays)])
        assert intersect_divisors(index35.fan, lifts) == value


def test_worked_example_q_matrices(index35):
    g = index35.grading
    d = {i + 1: g.ray_class(i) for i in range(g.r)}
    assert q_matrix(g, index35.fan, d[5], [d[4], d[2]]).entries == ((-4, 1), (1, -2))
    assert q_matrix(g, index35.fan, d[6], [d[3], d[4]]).entries == ((0, 0), (0, -2))


# determinants of the K3 Picard lattices listed for the threefolds
K3_DETERMINANTS = {
    23: 4, 7: -5, 19: -9, 20: -8, 22: -9, 6: 12, 11: 12, 12: 14, 16: 18,
    17: 16, 18: 20, 21: 16, 13: -31, 14: -28, 15: 48,
}


@pytest.mark.parametrize("index", sorted(K3_DETERMINANTS))
def test_k3_intersection_form_determinant(index):
    d = data(f"grdb:{index}")
    g = d.grading
    rho = g.picard_rank
    basis = [tuple(int(i == j) for j in range(rho)) for i in range(rho)]
    base = multiply(d.fan, unit_cycle(), g.lift_class(g.anticanonical))
    gram = [
        [multiply(d.fan, multiply(d.fan, base, g.lift_class(a)), g.lift_class(b)).degree() for b in basis]
        for a in basis
    ]
    assert det(gram) == K3_DETERMINANTS[index]


def test_k3_form_of_index7_in_table_basis():
    # h = class of D1 and e = class of D3 give the lattice (2 1; 1 -2)
    d = data("grdb:7")
    g = d.grading
    base = multiply(d.fan, unit_cycle(), g.lift_class(g.anticanonical))
    h, e = g.lift_class(g.ray_class(0)), g.lift_class(g.ray_class(2))
    form = [[multiply(d.fan, multiply(d.fan, base, a), b).degree() for b in (h, e)] for a in (h, e)]
    assert form == [[2, 1], [1, -2]]


def test_threefold_q_matrix_is_k3_form():
    d = data("grdb:23")
    g = d.grading
    assert q_matrix(g, d.fan, g.classes[0], [g.classes[0]]).entries == ((4,),)


def test_chow_errors():
    p = data("grdb:23").fan
    with pytest.raises(ValueError):
        intersection_number(p, [0, 1])
    singular = face_fan(polytope("conic-counterexample"), require_smooth=False)
    with pytest.raises(FanError):
        intersection_number(singular, [0, 1, 2])


@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[-4, 1], [1, -2]], (True, 2)),
        ([[0, 0], [0, -2]], (True, 1)),
        ([[1]], (False, 1)),
        ([[0]], (True, 0)),
        ([[0, 1], [1, 0]], (False, 2)),
    ],
)
def test_nsd_examples(rows, expected):
    assert is_negative_semidefinite_nontrivial(SymmetricForm(tuple(map(tuple, rows)))) == expected
    assert is_negative_semidefinite_nontrivial(rows)[0] == ldl_nsd(rows)


def test_nsd_rejects_asymmetric():
    with pytest.raises(ValueError):
        is_negative_semidefinite_nontrivial([[0, 1], [0, 0]])


def symmetric_matrices():
    def build(n):
        return st.lists(st.integers(-4, 4), min_size=n * (n + 1) // 2, max_size=n * (n + 1) // 2).map(
            lambda vals: _fill(n, vals)
        )

    return st.integers(1, 5).flatmap(build)


def _fill(n, vals):
    it = iter(vals)
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = next(it)
    return m


@given(symmetric_matrices())
@settings(max_examples=300, deadline=None)
def test_nsd_agrees_with_elimination_oracle(m):
    nsd, rk = is_negative_semidefinite_nontrivial(m)
    assert nsd == ldl_nsd(m)
    assert rk == rank(m) == form_rank(m)


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=4)))
@settings(max_examples=100, deadline=None)
def test_minus_gram_matrices_are_nsd(vectors):
    # -B^T B is always negative semidefinite
    n = len(vectors[0])
    gram = [[-sum(v[i] * v[j] for v in vectors) for j in range(n)] for i in range(n)]
    assert is_negative_semidefinite_nontrivial(gram)[0]
    assert ldl_nsd(gram)
