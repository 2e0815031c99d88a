from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import cube_fan, polytope, simplex
from toricmds.lattice import (
    DegeneracyError,
    LatticePolytope,
    det,
    hnf,
    hnf_basis,
    integer_kernel,
    invariant_factors,
    is_reflexive,
    is_saturated,
    is_simplicial,
    is_smooth,
    is_terminal,
    lattice_points,
    lattice_width_along,
    matmul,
    matvec,
    normalized_volume,
    polar,
    primitive,
    rank,
    saturate,
    slice_and_project,
    snf,
    solve,
    transpose,
)

small_int = st.integers(min_value=-6, max_value=6)


def matrices(max_rows=4, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_int, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


@given(matrices())
@settings(max_examples=150, deadline=None)
def test_hnf_is_unimodular_transform(m):
    h, u = hnf(m)
    assert matmul(u, m) == tuple(map(tuple, h))
    assert abs(det(u)) == 1
    # echelon with positive pivots and reduced entries above them
    last = -1
    for i, row in enumerate(h):
        if not any(row):
            assert not any(any(r) for r in h[i:])
            break
        piv = next(j for j, x in enumerate(row) if x)
        assert piv > last and row[piv] > 0
        assert all(0 <= h[k][piv] < row[piv] for k in range(i))
        last = piv


@given(matrices())
@settings(max_examples=100, deadline=None)
def test_snf_diagonal_divisibility(m):
    d, s, t = snf(m)
    assert matmul(matmul(s, m), t) == d
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    assert all(x >= 0 for x in diag)
    nz = [x for x in diag if x]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert len(nz) == rank(m)


@given(matrices())
@settings(max_examples=150, deadline=None)
def test_integer_kernel_is_saturated_basis(m):
    k = integer_kernel(m, len(m[0]))
    assert len(k) == len(m[0]) - rank(m)
    for v in k:
        assert not any(matvec(m, v))
    if k:
        assert is_saturated(k)
        assert hnf_basis(k) == k


def test_hnf_basis_is_invariant_under_row_operations():
    m = [[2, 4, 6], [1, 3, 5]]
    mixed = [[3, 7, 11], [1, 3, 5]]
    assert hnf_basis(m) == hnf_basis(mixed)


def test_saturation_of_scaled_rows():
    assert saturate([[2, 4, 6]]) == ((1, 2, 3),)
    assert invariant_factors([[2, 0], [0, 3]]) == (1, 6)


def test_solve_inconsistent_returns_none():
    assert solve([[1, 1], [2, 2]], [1, 3]) is None
    assert solve([[2, 0], [0, 4]], [1, 2]) == (Fraction(1, 2), Fraction(1, 2))


def test_primitive():
    assert primitive((4, -6, 0)) == (2, -3, 0)
    assert primitive((Fraction(1, 2), Fraction(1, 3))) == (3, 2)


def test_projective_space_basics():
    p = simplex(3)
    assert len(p.facets) == 4
    assert is_smooth(p) and is_reflexive(p) and is_terminal(p)
    dual = polar(p)
    assert len(lattice_points(dual)) == 35
    assert normalized_volume(dual) == 64
    assert polar(dual).same_vertex_set(p)


def test_lattice_width_of_polar_simplex():
    # the polar of the simplex has vertices with first coordinates -1 and 3
    assert lattice_width_along(polar(simplex(3)), (1, 0, 0)) == 4
    with pytest.raises(ValueError):
        lattice_width_along(simplex(3), (2, 0, 0))


def test_polar_is_involutive_on_bundled_data():
    for rid in ("grdb:35", "grdb:117", "grdb:7", "grdb:13"):
        p = polytope(rid)
        assert polar(polar(p)).same_vertex_set(p)


def test_counterexample_polytope_properties():
    p = polytope("conic-counterexample")
    assert is_simplicial(p) and is_terminal(p)
    assert not is_smooth(p) and not is_reflexive(p)
    assert p.has_interior_origin()


def test_cross_polytope_facets_and_volume():
    c = cube_fan(3)
    assert len(c.facets) == 8
    # eight unimodular simplices, one per orthant
    assert normalized_volume(c) == 8
    assert normalized_volume(LatticePolytope([(0, 0), (2, 0), (0, 2)])) == 4


def test_normalized_volume_matches_determinant():
    verts = [(0, 0, 0), (1, 0, 0), (0, 2, 0), (1, 1, 3)]
    assert normalized_volume(LatticePolytope(verts)) == abs(det([v for v in verts[1:]]))


def test_non_vertex_rejected():
    with pytest.raises(ValueError):
        LatticePolytope([(1, 0), (0, 1), (-1, -1), (0, 0)])
    with pytest.raises(ValueError):
        LatticePolytope([(1, 0), (1, 0), (0, 1), (-1, -1)])
    with pytest.raises(DegeneracyError):
        LatticePolytope([(1, 0), (2, 0), (3, 0)])


def test_section_polar_equals_projection_of_polar():
    # for a saturated sublattice through the interior, the polar of the
    # section equals the projection of the polar
    for rid, basis in (("grdb:35", [(1, 0, 0, 0), (0, 0, 0, 1)]), ("grdb:22", [(1, 0, 0), (0, 1, 0)])):
        p = polytope(rid)
        section, projection = slice_and_project(p, basis)
        assert polar(section).same_vertex_set(projection)


def test_slice_requires_saturated_basis():
    with pytest.raises(ValueError):
        slice_and_project(simplex(3), [(2, 0, 0), (0, 1, 0)])


def test_vertex_matrix_layout():
    p = LatticePolytope.from_columns([[1, 0, -1], [0, 1, -1]])
    assert p.vertices == ((1, 0), (0, 1), (-1, -1))
    assert p.vertex_matrix() == transpose(p.vertices)
