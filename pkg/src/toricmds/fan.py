"""Face fans of Fano polytopes, primitive collections and primitive relations.

Vertex indices are 0-based in the Python API; ``str()`` of relations and
all CLI output use 1-based labels ``v1, ..., vr``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cones import RationalCone
from .lattice import (
    LatticePolytope,
    Number,
    add,
    dot,
    integer_kernel,
    is_simplicial,
    is_smooth,
    matvec,
    neg,
    rank,
    solve,
    transpose,
)


class FanError(ValueError):
    pass


class InconsistencyError(RuntimeError):
    """A computation produced something impossible for smooth Fano input."""


@dataclass(frozen=True)
class FaceFan:
    """Simplicial face fan: one maximal cone (vertex index set) per facet."""

    polytope: LatticePolytope
    maximal_cones: tuple[frozenset[int], ...]
    smooth: bool

    @property
    def dim(self) -> int:
        return self.polytope.dim

    @property
    def rays(self) -> tuple[tuple[int, ...], ...]:
        return self.polytope.vertices

    @property
    def num_rays(self) -> int:
        return len(self.polytope.vertices)

    def is_face(self, indices) -> bool:
        s = frozenset(indices)
        return any(s <= c for c in self.maximal_cones)

    def maximal_cones_containing(self, indices) -> list[frozenset[int]]:
        s = frozenset(indices)
        return sorted((c for c in self.maximal_cones if s <= c), key=sorted)

    def cone_coordinates(self, cone: frozenset[int], p: Sequence[Number]) -> tuple | None:
        idx = sorted(cone)
        return solve(transpose([self.rays[i] for i in idx]), p)


def face_fan(p: LatticePolytope, require_smooth: bool = True) -> FaceFan:
    """Face fan of a simplicial Fano polytope.

    With ``require_smooth`` (the default) non-smooth input is rejected;
    simplicial but singular fans are accepted otherwise, which is what the
    projection check needs.
    """
    if not p.has_interior_origin():
        raise FanError("origin is not interior to the polytope")
    if not is_simplicial(p):
        raise FanError("polytope is not simplicial")
    smooth = is_smooth(p)
    if require_smooth and not smooth:
        raise FanError("polytope is not smooth")
    cones = tuple(sorted(p.facet_vertex_sets(), key=sorted))
    return FaceFan(p, cones, smooth)


def minimal_cone_containing(fan: FaceFan, p: Sequence[Number]) -> frozenset[int]:
    """Support of ``p`` in the unique minimal cone containing it."""
    if not any(p):
        return frozenset()
    for cone in fan.maximal_cones:
        coords = fan.cone_coordinates(cone, p)
        if coords is not None and all(c >= 0 for c in coords):
            idx = sorted(cone)
            return frozenset(i for i, c in zip(idx, coords) if c != 0)
    raise InconsistencyError("fan is not complete")


def primitive_collections(fan: FaceFan) -> tuple[tuple[int, ...], ...]:
    """Minimal non-faces, ordered by size then lexicographically."""
    faces_by_size: dict[int, set[frozenset[int]]] = {}
    for c in fan.maximal_cones:
        for k in range(len(c) + 1):
            for s in itertools.combinations(sorted(c), k):
                faces_by_size.setdefault(k, set()).add(frozenset(s))
    found: list[tuple[int, ...]] = []
    r = fan.num_rays
    for k in range(2, fan.dim + 2):
        smaller = faces_by_size.get(k - 1, set())
        candidates = set()
        for f in smaller:
            for i in range(max(f) + 1 if f else 0, r):
                candidates.add(f | {i})
        for cand in candidates:
            if cand in faces_by_size.get(k, set()):
                continue
            if all(cand - {i} in smaller for i in cand):
                found.append(tuple(sorted(cand)))
    return tuple(sorted(found, key=lambda t: (len(t), t)))


@dataclass(frozen=True)
class PrimitiveRelation:
    """``sum_{i in collection} v_i = sum_j c_j v_j`` with its degree."""

    collection: tuple[int, ...]
    rhs: tuple[tuple[int, int], ...]
    degree: int

    @property
    def k(self) -> int:
        return len(self.collection)

    @property
    def ell(self) -> int:
        return len(self.rhs)

    @property
    def is_pair(self) -> bool:
        return len(self.collection) == 2

    def rhs_dict(self) -> dict[int, int]:
        return dict(self.rhs)

    def vector(self, r: int) -> tuple[int, ...]:
        """Relation vector in Z^r: +1 on the collection, -c_j on the right."""
        out = [0] * r
        for i in self.collection:
            out[i] += 1
        for j, c in self.rhs:
            out[j] -= c
        return tuple(out)

    def __str__(self) -> str:
        left = " + ".join(f"v{i + 1}" for i in self.collection)
        right = " + ".join(f"v{j + 1}" if c == 1 else f"{c}*v{j + 1}" for j, c in self.rhs) or "0"
        return f"{left} = {right}"

    def to_json(self) -> dict:
        return {
            "collection": [i + 1 for i in self.collection],
            "rhs": {str(j + 1): c for j, c in self.rhs},
            "degree": self.degree,
        }


def primitive_relation(fan: FaceFan, collection: Sequence[int]) -> PrimitiveRelation:
    if not fan.smooth:
        raise FanError("primitive relations need a smooth fan")
    coll = tuple(sorted(collection))
    total = tuple([0] * fan.dim)
    for i in coll:
        total = add(total, fan.rays[i])
    support = minimal_cone_containing(fan, total)
    rhs: list[tuple[int, int]] = []
    if support:
        idx = sorted(support)
        coords = solve(transpose([fan.rays[i] for i in idx]), total)
        for i, c in zip(idx, coords):
            if not isinstance(c, int) or c <= 0:
                raise InconsistencyError(f"non-integral relation coefficient {c}")
            rhs.append((i, c))
    degree = len(coll) - sum(c for _, c in rhs)
    if degree < 1:
        raise InconsistencyError("primitive relation of nonpositive degree: not Fano")
    return PrimitiveRelation(coll, tuple(rhs), degree)


def primitive_relations(fan: FaceFan) -> tuple[PrimitiveRelation, ...]:
    return tuple(primitive_relation(fan, c) for c in primitive_collections(fan))


def is_extremal(
    relations: Sequence[PrimitiveRelation], target: PrimitiveRelation, r: int
) -> bool:
    """Is the target relation vector extremal in the cone of all relation vectors?"""
    t = target.vector(r)
    others = []
    for rel in relations:
        v = rel.vector(r)
        if _positive_multiple(v, t):
            continue
        others.append(v)
    if not others:
        return True
    return not RationalCone.from_generators(others, r).contains(t)


def _positive_multiple(a: Sequence[int], b: Sequence[int]) -> bool:
    if rank([a, b]) > 1:
        return False
    return dot(a, b) > 0


def _cone_over_face_contains(facet, points, p) -> bool:
    if not any(p):
        return True
    val = dot(facet.normal, p)
    if val >= 0:
        return False
    scaled = tuple(Fraction(-facet.offset * x) / val for x in p)
    return all(h.contains(scaled) for h in points)


def check_projection_fan_map(
    p: LatticePolytope, v: Sequence[int] | int
) -> tuple[bool, list[frozenset[int]]]:
    """Does the quotient by ``Z v`` map every maximal cone into a cone of the image fan?

    ``v`` may be a vertex index or a vector; ``-v`` must also be a vertex.
    Returns ``(ok, offending maximal cones)``.
    """
    vec = p.vertices[v] if isinstance(v, int) else tuple(v)
    if p.index_of(vec) is None or p.index_of(neg(vec)) is None:
        raise FanError("need a vertex v with -v also a vertex")
    fan = face_fan(p, require_smooth=False)
    proj = integer_kernel([vec])  # rows: basis of v-perp in M, i.e. N -> N / Z v
    images = [matvec(proj, x) for x in p.vertices]
    base = LatticePolytope.from_points(images)
    offenders = []
    for cone in fan.maximal_cones:
        gens = [images[i] for i in cone]
        if not any(all(_cone_over_face_contains(f, base.facets, g) for g in gens) for f in base.facets):
            offenders.append(cone)
    return (not offenders), offenders
