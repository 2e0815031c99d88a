"""Exact lattice linear algebra and lattice polytope geometry.

Vectors are plain tuples of ``int`` (or ``Fraction`` for rational points).
Matrices are tuples of row tuples.  Nothing in this module uses floating
point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

Number = int | Fraction
Vector = tuple
IntMatrix = tuple


class DegeneracyError(ValueError):
    """Raised when a point set does not span its ambient space affinely."""


class NotInteriorError(ValueError):
    """Raised when the origin is not in the interior of a polytope."""


# ---------------------------------------------------------------------------
# small vector helpers


def dot(u: Sequence[Number], v: Sequence[Number]) -> Number:
    return sum(a * b for a, b in zip(u, v))


def add(u: Sequence[Number], v: Sequence[Number]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Number], v: Sequence[Number]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c: Number, v: Sequence[Number]) -> Vector:
    return tuple(c * a for a in v)


def neg(v: Sequence[Number]) -> Vector:
    return tuple(-a for a in v)


def _scale_factor(target: Sequence[Number], v: Sequence[Number]) -> Fraction:
    """The positive ``t`` with ``target == t * v`` (vectors on one ray)."""
    k = next(i for i, x in enumerate(v) if x)
    return Fraction(target[k]) / Fraction(v[k])


def _normalize_number(x: Number) -> Number:
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def normalize(v: Iterable[Number]) -> Vector:
    """Return ``v`` as a tuple, turning integral fractions into ints."""
    return tuple(_normalize_number(x) for x in v)


def is_primitive(v: Sequence[int]) -> bool:
    return any(v) and math.gcd(*v) == 1


def primitive(v: Sequence[Number]) -> tuple[int, ...]:
    """Primitive integer vector on the ray through ``v`` (same direction)."""
    fr = [Fraction(x) for x in v]
    if not any(fr):
        raise ValueError("zero vector has no primitive generator")
    den = math.lcm(*(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints)


def sign_normalized(v: Sequence[int]) -> tuple[int, ...]:
    """Primitive vector with first nonzero coordinate positive (for lines)."""
    p = primitive(v)
    for x in p:
        if x:
            return p if x > 0 else neg(p)
    return p


def transpose(m: Sequence[Sequence[Number]]) -> IntMatrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: Sequence[Sequence[Number]], b: Sequence[Sequence[Number]]) -> IntMatrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def matvec(a: Sequence[Sequence[Number]], v: Sequence[Number]) -> Vector:
    return tuple(dot(row, v) for row in a)


def identity(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


# ---------------------------------------------------------------------------
# rational elimination


def rref(rows: Sequence[Sequence[Number]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence[Number]]) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence[Number]], ncols: int | None = None) -> list[Vector]:
    """Basis of the rational right kernel ``{x : rows . x = 0}``."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(normalize(x))
    return basis


def solve(a: Sequence[Sequence[Number]], b: Sequence[Number]) -> Vector | None:
    """Solve ``a x = b`` over Q; None if inconsistent.  Free variables set to 0."""
    n = len(a[0])
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return normalize(x)


def det(m: Sequence[Sequence[Number]]) -> Number:
    """Exact determinant (Bareiss for integers, Fractions otherwise)."""
    n = len(m)
    if n == 0:
        return 1
    a = [[Fraction(x) for x in row] for row in m]
    sign = 1
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        d *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return _normalize_number(sign * d)


# ---------------------------------------------------------------------------
# integer normal forms


def hnf(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U * m == H``.  ``H`` is in
    row echelon form, pivots are positive, entries above a pivot lie in
    ``[0, pivot)``, zero rows come last.
    """
    rows = [list(r) for r in m]
    nrows = len(rows)
    if nrows == 0:
        return (), ()
    ncols = len(rows[0])
    u = [list(r) for r in identity(nrows)]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        # gcd-combine everything below row r into row r
        for i in range(r + 1, nrows):
            if rows[i][c] == 0:
                continue
            a, b = rows[r][c], rows[i][c]
            g, x, y = _xgcd(a, b)
            p, q = a // g, b // g
            ra, rb = rows[r], rows[i]
            ua, ub = u[r], u[i]
            rows[r] = [x * s + y * t for s, t in zip(ra, rb)]
            rows[i] = [-q * s + p * t for s, t in zip(ra, rb)]
            u[r] = [x * s + y * t for s, t in zip(ua, ub)]
            u[i] = [-q * s + p * t for s, t in zip(ua, ub)]
        if rows[r][c] == 0:
            continue
        if rows[r][c] < 0:
            rows[r] = [-x for x in rows[r]]
            u[r] = [-x for x in u[r]]
        piv = rows[r][c]
        for i in range(r):
            f = rows[i][c] // piv
            if f:
                rows[i] = [s - f * t for s, t in zip(rows[i], rows[r])]
                u[i] = [s - f * t for s, t in zip(u[i], u[r])]
        r += 1
    return tuple(map(tuple, rows)), tuple(map(tuple, u))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hnf_basis(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Nonzero rows of the HNF: a canonical basis of the row lattice."""
    h, _ = hnf(m)
    return tuple(row for row in h if any(row))


def snf(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form ``(D, S, T)`` with ``S * m * T == D``."""
    mat = Matrix([list(r) for r in m])
    d, s, t = smith_normal_decomp(mat, domain=ZZ)
    as_t = lambda x: tuple(tuple(int(v) for v in x.row(i)) for i in range(x.rows))
    d_t, s_t, t_t = as_t(d), as_t(s), as_t(t)
    # sympy may return negative invariants; fold the sign into S
    s_l = [list(r) for r in s_t]
    d_l = [list(r) for r in d_t]
    for i in range(min(len(d_l), len(d_l[0]) if d_l else 0)):
        if d_l[i][i] < 0:
            d_l[i] = [-x for x in d_l[i]]
            s_l[i] = [-x for x in s_l[i]]
    return tuple(map(tuple, d_l)), tuple(map(tuple, s_l)), t_t


def invariant_factors(m: Sequence[Sequence[int]]) -> tuple[int, ...]:
    d, _, _ = snf(m)
    k = min(len(d), len(d[0])) if d else 0
    return tuple(d[i][i] for i in range(k) if d[i][i] != 0)


def is_saturated(m: Sequence[Sequence[int]]) -> bool:
    """True iff the row lattice of ``m`` is saturated in Z^k."""
    return all(f == 1 for f in invariant_factors(m))


def integer_kernel(m: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Saturated basis (rows) of ``{x in Z^c : m x = 0}``, HNF-canonical."""
    if ncols is None:
        ncols = len(m[0])
    if not m or not any(any(r) for r in m):
        return identity(ncols)
    # U m^T = H; rows of U against zero rows of H span the left kernel of m^T
    h, u = hnf(transpose(m))
    ker = [u[i] for i, row in enumerate(h) if not any(row)]
    if not ker:
        return ()
    return hnf_basis(ker)


def saturate(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Canonical basis of (row space of m) intersected with Z^k."""
    k = len(m[0])
    return integer_kernel(integer_kernel(m, k), k)


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Halfspace:
    """The inequality ``<normal, x> >= -offset``."""

    normal: tuple[int, ...]
    offset: Number

    def slack(self, x: Sequence[Number]) -> Number:
        return dot(self.normal, x) + self.offset

    def contains(self, x: Sequence[Number]) -> bool:
        return self.slack(x) >= 0

    def is_tight(self, x: Sequence[Number]) -> bool:
        return self.slack(x) == 0


def _affine_rank(points: Sequence[Sequence[Number]]) -> int:
    if not points:
        return -1
    p0 = points[0]
    return rank([sub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def convex_hull_facets(points: Sequence[Sequence[Number]]) -> tuple[Halfspace, ...]:
    """Facet inequalities of conv(points) by exhaustive n-subset search.

    Raises DegeneracyError if the points do not affinely span R^n.
    """
    pts = [normalize(p) for p in points]
    if not pts:
        raise DegeneracyError("empty point set")
    n = len(pts[0])
    if _affine_rank(pts) < n:
        raise DegeneracyError("points do not span the ambient space affinely")
    found: dict[tuple, Halfspace] = {}
    for subset in itertools.combinations(range(len(pts)), n):
        rows = [list(pts[i]) + [-1] for i in subset]
        ker = nullspace(rows, n + 1)
        if len(ker) != 1:
            continue
        sol = ker[0]
        if not any(sol[:n]):
            continue
        normal = primitive(sol[:n])
        c = Fraction(sol[n]) * _scale_factor(normal, sol[:n])
        # normal . p == c on the subset; orient so every point has normal.p >= c
        vals = [dot(normal, p) for p in pts]
        if all(v >= c for v in vals):
            pass
        elif all(v <= c for v in vals):
            normal, c = neg(normal), -c
        else:
            continue
        # normal is primitive already; keep offset exact
        h = Halfspace(tuple(normal), _normalize_number(-c))
        found[(h.normal, h.offset)] = h
    return tuple(sorted(found.values(), key=lambda h: (h.normal, h.offset)))


def halfspace_vertices(halfspaces: Sequence[Halfspace], dim: int) -> list[Vector]:
    """Vertices of the polyhedron cut out by ``halfspaces`` (H to V by subsets)."""
    found = set()
    for subset in itertools.combinations(halfspaces, dim):
        a = [h.normal for h in subset]
        if rank(a) < dim:
            continue
        x = solve(a, [-h.offset for h in subset])
        if x is None:
            continue
        if all(h.contains(x) for h in halfspaces):
            found.add(x)
    return sorted(found)


class LatticePolytope:
    """A full-dimensional polytope given by its vertices.

    Vertices keep their input order (the index ``i`` here is ``v_{i+1}`` in
    1-based reports).  Facets are computed eagerly so that instances are
    immutable and can be shared between threads.
    """

    __slots__ = ("vertices", "dim", "facets", "_hash")

    def __init__(
        self,
        vertices: Iterable[Sequence[Number]],
        facets: Sequence[Halfspace] | None = None,
        check: bool = True,
    ):
        verts = tuple(normalize(v) for v in vertices)
        if not verts:
            raise DegeneracyError("polytope without vertices")
        dim = len(verts[0])
        if any(len(v) != dim for v in verts):
            raise ValueError("vertices of different lengths")
        if len(set(verts)) != len(verts):
            raise ValueError("repeated vertex")
        fac = tuple(facets) if facets is not None else convex_hull_facets(verts)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "facets", fac)
        object.__setattr__(self, "_hash", hash(verts))
        if check:
            for i, v in enumerate(verts):
                tight = [h.normal for h in fac if h.is_tight(v)]
                if rank(tight) < dim:
                    raise ValueError(f"point {i + 1} is not a vertex of the hull")

    def __setattr__(self, name, value):
        raise AttributeError("LatticePolytope is immutable")

    @classmethod
    def from_columns(cls, rows: Sequence[Sequence[int]]) -> "LatticePolytope":
        """Build from a matrix whose columns are the vertices."""
        return cls(transpose(rows))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[Number]]) -> "LatticePolytope":
        """Convex hull of arbitrary points; non-vertices are dropped."""
        pts = sorted(set(normalize(p) for p in points))
        fac = convex_hull_facets(pts)
        n = len(pts[0])
        verts = [p for p in pts if rank([h.normal for h in fac if h.is_tight(p)]) == n]
        return cls(verts, fac, check=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticePolytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"LatticePolytope({[list(v) for v in self.vertices]})"

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def vertex_matrix(self) -> IntMatrix:
        """n x r matrix with the vertices as columns."""
        return transpose(self.vertices)

    def sorted_vertices(self) -> tuple[Vector, ...]:
        return tuple(sorted(self.vertices))

    def same_vertex_set(self, other: "LatticePolytope") -> bool:
        return self.sorted_vertices() == other.sorted_vertices()

    def facet_vertex_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(
            frozenset(i for i, v in enumerate(self.vertices) if h.is_tight(v)) for h in self.facets
        )

    def contains(self, x: Sequence[Number]) -> bool:
        return all(h.contains(x) for h in self.facets)

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for v in self.vertices for x in v)

    def has_interior_origin(self) -> bool:
        return all(h.offset > 0 for h in self.facets)

    def index_of(self, v: Sequence[Number]) -> int | None:
        v = normalize(v)
        try:
            return self.vertices.index(v)
        except ValueError:
            return None


def polar(p: LatticePolytope) -> LatticePolytope:
    """The dual polytope ``{u : <x, u> >= -1 for x in p}``, vertices sorted."""
    if not p.has_interior_origin():
        raise NotInteriorError("origin is not interior")
    verts = sorted(normalize(Fraction(x, 1) / h.offset for x in h.normal) for h in p.facets)
    facets = []
    for v in p.vertices:
        prim = primitive(v)
        # <v, u> >= -1 with v = g * prim
        facets.append(Halfspace(prim, _normalize_number(_scale_factor(prim, v))))
    facets.sort(key=lambda h: (h.normal, h.offset))
    return LatticePolytope(verts, facets, check=False)


def lattice_points(p: LatticePolytope) -> list[tuple[int, ...]]:
    """All integer points of ``p`` in lexicographic order.

    Box enumeration with interval pruning: after fixing a prefix of the
    coordinates, an inequality that cannot be met by any completion inside
    the bounding box cuts the branch.
    """
    n = p.dim
    lo = [math.ceil(min(Fraction(v[k]) for v in p.vertices)) for k in range(n)]
    hi = [math.floor(max(Fraction(v[k]) for v in p.vertices)) for k in range(n)]
    hs = [(h.normal, h.offset) for h in p.facets]
    # suffix maxima of each inequality's remaining part over the box
    suffix = []
    for normal, _ in hs:
        s = [0] * (n + 1)
        for k in range(n - 1, -1, -1):
            s[k] = s[k + 1] + max(normal[k] * lo[k], normal[k] * hi[k])
        suffix.append(s)
    out: list[tuple[int, ...]] = []
    partial = [0] * len(hs)

    def rec(k: int, prefix: list[int]) -> None:
        if k == n:
            if all(partial[j] + off >= 0 for j, (_, off) in enumerate(hs)):
                out.append(tuple(prefix))
            return
        for x in range(lo[k], hi[k] + 1):
            ok = True
            for j, (normal, off) in enumerate(hs):
                partial[j] += normal[k] * x
            for j, (normal, off) in enumerate(hs):
                if partial[j] + suffix[j][k + 1] + off < 0:
                    ok = False
                    break
            if ok:
                prefix.append(x)
                rec(k + 1, prefix)
                prefix.pop()
            for j, (normal, off) in enumerate(hs):
                partial[j] -= normal[k] * x

    rec(0, [])
    return out


def is_simplicial(p: LatticePolytope) -> bool:
    return all(len(s) == p.dim for s in p.facet_vertex_sets())


def is_reflexive(p: LatticePolytope) -> bool:
    """Integral, origin interior, every facet at lattice distance one."""
    if not p.is_integral() or not p.has_interior_origin():
        return False
    return all(h.offset == 1 for h in p.facets)


def is_terminal(p: LatticePolytope) -> bool:
    if not p.is_integral() or not p.has_interior_origin():
        return False
    expected = {tuple([0] * p.dim), *p.vertices}
    return set(lattice_points(p)) == expected


def is_smooth(p: LatticePolytope) -> bool:
    """Simplicial with each facet's vertices a lattice basis."""
    if not p.is_integral() or not p.has_interior_origin():
        return False
    for s in p.facet_vertex_sets():
        if len(s) != p.dim:
            return False
        if abs(det([p.vertices[i] for i in sorted(s)])) != 1:
            return False
    return True


def is_smooth_fano(p: LatticePolytope) -> bool:
    return is_smooth(p)


def lattice_width_along(p: LatticePolytope, v: Sequence[int]) -> Number:
    """Length of the image of ``p`` under the functional ``v``."""
    if not is_primitive(tuple(v)):
        raise ValueError("direction must be a primitive nonzero vector")
    vals = [dot(v, x) for x in p.vertices]
    return _normalize_number(max(vals) - min(vals))


def slice_and_project(
    p: LatticePolytope, basis: Sequence[Sequence[int]]
) -> tuple[LatticePolytope, LatticePolytope]:
    """Slice ``p`` by the span of a saturated sublattice and project the polar.

    Returns ``(section, projection)``: the section ``p`` cut by the real span
    of the rows of ``basis``, written in basis coordinates, and the image of
    ``polar(p)`` under restriction of functionals to the sublattice.
    """
    b = [tuple(r) for r in basis]
    k = len(b)
    if rank(b) < k:
        raise ValueError("basis rows are linearly dependent")
    if not is_saturated(b):
        raise ValueError("sublattice is not saturated; saturate() it first")
    # <u, y B> = (B u) . y
    restricted = []
    for h in p.facets:
        nv = matvec(b, h.normal)
        if not any(nv):
            raise DegeneracyError("subspace is parallel to a facet through the origin")
        prim = primitive(nv)
        t = _scale_factor(prim, nv)
        restricted.append(Halfspace(prim, _normalize_number(Fraction(h.offset) * t)))
    section = LatticePolytope.from_points(halfspace_vertices(restricted, k))
    dual = polar(p)
    projection = LatticePolytope.from_points(matvec(b, m) for m in dual.vertices)
    return section, projection


def normalized_volume(p: LatticePolytope) -> Number:
    """``n! * vol(p)`` via a pulling triangulation."""
    n = p.dim
    vsets = [frozenset(s) for s in p.facet_vertex_sets()]
    verts = p.vertices
    total = Fraction(0)
    seen_faces: dict[tuple[frozenset[int], int], list[list[int]]] = {}

    def triangulate(face: frozenset[int], d: int) -> list[list[int]]:
        key = (face, d)
        if key in seen_faces:
            return seen_faces[key]
        if len(face) == d + 1:
            res = [sorted(face)]
        else:
            apex = min(face, key=lambda i: verts[i])
            subfaces = set()
            for s in vsets:
                sub_f = face & s
                if apex in sub_f or len(sub_f) < d:
                    continue
                if _affine_rank([verts[i] for i in sub_f]) == d - 1:
                    subfaces.add(frozenset(sub_f))
            res = []
            for sf in sorted(subfaces, key=sorted):
                for simplex in triangulate(sf, d - 1):
                    res.append([apex] + simplex)
        seen_faces[key] = res
        return res

    for simplex in triangulate(frozenset(range(len(verts))), n):
        base = verts[simplex[0]]
        total += abs(Fraction(det([sub(verts[i], base) for i in simplex[1:]])))
    return _normalize_number(total)
