"""Exact rational polyhedral cones.

A :class:`RationalCone` keeps both descriptions in sync: primitive extremal
rays, primitive facet normals and (for cones that are not full-dimensional)
the linear equations of their span.  Conversion uses the double description
method over the integers.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .lattice import (
    dot,
    integer_kernel,
    matmul,
    matvec,
    nullspace,
    primitive,
    rank,
    saturate,
    sign_normalized,
    solve,
    transpose,
)


class NonPointedConeError(ValueError):
    """The cone contains a line."""


class DimensionMismatchError(ValueError):
    pass


def _prim_or_none(v: Sequence[int]) -> tuple[int, ...] | None:
    return primitive(v) if any(v) else None


def extreme_rays(inequalities: Sequence[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """Extreme rays of ``{y : a . y >= 0 for a in inequalities}``.

    Double description: start from a simplicial cone cut out by ``dim``
    independent rows and add the remaining rows one at a time.  The cone
    must be pointed (the rows have full rank).
    """
    rows = [tuple(a) for a in inequalities if any(a)]
    if rank(rows) < dim:
        raise NonPointedConeError("inequality system has a lineality space")
    base: list[tuple[int, ...]] = []
    rest: list[tuple[int, ...]] = []
    for a in rows:
        if len(base) < dim and rank(base + [a]) > len(base):
            base.append(a)
        else:
            rest.append(a)
    # rays of the initial simplicial cone: columns of base^{-1}
    rays: list[tuple[int, ...]] = []
    for j in range(dim):
        e = [int(i == j) for i in range(dim)]
        rays.append(primitive(solve(base, e)))
    processed = list(base)
    zero_sets = [frozenset(i for i, a in enumerate(processed) if dot(a, r) == 0) for r in rays]
    for a in rest:
        vals = [dot(a, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg_ = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        new_index = len(processed)
        processed.append(a)
        new_rays = [rays[i] for i in pos + zer]
        new_zero = [zero_sets[i] for i in pos] + [zero_sets[i] | {new_index} for i in zer]
        for p in pos:
            for q in neg_:
                common = zero_sets[p] & zero_sets[q]
                if len(common) < dim - 2:
                    continue
                if rank([processed[i] for i in common]) != dim - 2:
                    continue
                # no third ray may sit on the whole common face
                if any(
                    k not in (p, q) and common <= zero_sets[k] for k in range(len(rays))
                ):
                    continue
                comb = tuple(vals[p] * y - vals[q] * x for x, y in zip(rays[p], rays[q]))
                r = primitive(comb)
                new_rays.append(r)
                new_zero.append(common | {new_index})
        rays, zero_sets = new_rays, new_zero
    return sorted(set(rays))


class RationalCone:
    """A pointed rational polyhedral cone in ``Q^ambient_dim``.

    ``rays`` are the primitive extremal generators, ``facets`` the primitive
    inward facet normals and ``equations`` a basis of the orthogonal
    complement of the linear span (empty for full-dimensional cones).
    Facet normals of lower-dimensional cones are chosen inside the span.
    """

    __slots__ = ("ambient_dim", "rays", "facets", "equations")

    def __init__(self, ambient_dim, rays, facets, equations):
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "rays", tuple(rays))
        object.__setattr__(self, "facets", tuple(facets))
        object.__setattr__(self, "equations", tuple(equations))

    def __setattr__(self, name, value):
        raise AttributeError("RationalCone is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalCone)
            and self.ambient_dim == other.ambient_dim
            and self.rays == other.rays
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.rays))

    def __repr__(self) -> str:
        return f"RationalCone(rays={[list(r) for r in self.rays]})"

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, ambient_dim: int) -> "RationalCone":
        eqs = [tuple(int(i == j) for j in range(ambient_dim)) for i in range(ambient_dim)]
        return cls(ambient_dim, (), (), eqs)

    @classmethod
    def from_generators(
        cls, vectors: Iterable[Sequence[int]], ambient_dim: int | None = None
    ) -> "RationalCone":
        gens = [tuple(v) for v in vectors]
        if ambient_dim is None:
            if not gens:
                raise ValueError("ambient dimension needed for an empty generator list")
            ambient_dim = len(gens[0])
        if ambient_dim < 1:
            raise ValueError("ambient dimension must be positive")
        if any(len(g) != ambient_dim for g in gens):
            raise DimensionMismatchError("generator of wrong length")
        gens = sorted({primitive(g) for g in gens if any(g)})
        if not gens:
            return cls.zero(ambient_dim)
        k = rank(gens)
        if k == ambient_dim:
            normals = extreme_rays(gens, ambient_dim)
            if rank(normals) < ambient_dim:
                raise NonPointedConeError("generators span a cone containing a line")
            rays = extreme_rays(normals, ambient_dim)
            return cls(ambient_dim, rays, normals, ())
        # lower-dimensional: work in lattice coordinates of the span
        span = saturate(gens)
        span_t = transpose(span)
        coords = [solve(span_t, g) for g in gens]
        inner = cls.from_generators([primitive(c) for c in coords], k)
        rays = sorted(primitive(matvec(span_t, c)) for c in inner.rays)
        gram = matmul(span, span_t)
        facets = []
        for ell in inner.facets:
            # u in the span with span . u = ell
            t = solve(gram, ell)
            facets.append(primitive(matvec(span_t, t)))
        eqs = sorted(sign_normalized(e) for e in integer_kernel(gens, ambient_dim))
        return cls(ambient_dim, rays, sorted(facets), eqs)

    @classmethod
    def from_inequalities(
        cls,
        normals: Iterable[Sequence[int]],
        ambient_dim: int,
        equations: Iterable[Sequence[int]] = (),
    ) -> "RationalCone":
        rows = [tuple(a) for a in normals]
        eqs = [tuple(e) for e in equations]
        if any(len(a) != ambient_dim for a in rows + eqs):
            raise DimensionMismatchError("constraint of wrong length")
        system = rows + eqs + [tuple(-x for x in e) for e in eqs]
        if not any(any(a) for a in system):
            raise NonPointedConeError("no constraints: the whole space")
        rays = extreme_rays(system, ambient_dim)
        if not rays:
            return cls.zero(ambient_dim)
        return cls.from_generators(rays, ambient_dim)

    # -- queries ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return rank(self.rays) if self.rays else 0

    def is_full_dimensional(self) -> bool:
        return self.dim == self.ambient_dim

    def is_zero(self) -> bool:
        return not self.rays

    def contains(self, v: Sequence[int]) -> bool:
        if len(v) != self.ambient_dim:
            raise DimensionMismatchError("vector of wrong length")
        return all(dot(e, v) == 0 for e in self.equations) and all(
            dot(f, v) >= 0 for f in self.facets
        )

    def contains_cone(self, other: "RationalCone") -> bool:
        return all(self.contains(r) for r in other.rays)

    def in_relative_interior(self, v: Sequence[int]) -> bool:
        return all(dot(e, v) == 0 for e in self.equations) and all(
            dot(f, v) > 0 for f in self.facets
        )

    def dual(self) -> "RationalCone":
        if not self.is_full_dimensional():
            raise NonPointedConeError("dual of a lower-dimensional cone contains a line")
        return RationalCone.from_generators(self.facets, self.ambient_dim)

    def facet_cones(self) -> list["RationalCone"]:
        """One subcone per facet, generated by the rays tight on it."""
        if not self.is_full_dimensional():
            raise ValueError("facet_cones needs a full-dimensional cone")
        return [
            RationalCone.from_generators(
                [r for r in self.rays if dot(f, r) == 0], self.ambient_dim
            )
            for f in self.facets
        ]

    def image(self, matrix: Sequence[Sequence[int]]) -> "RationalCone":
        """Image under a linear map given by a square integer matrix."""
        return RationalCone.from_generators(
            [matvec(matrix, r) for r in self.rays], self.ambient_dim
        )

    def to_json(self) -> dict:
        return {"rays": [list(r) for r in self.rays], "facets": [list(f) for f in self.facets]}


def from_generators(vectors, ambient_dim=None) -> RationalCone:
    return RationalCone.from_generators(vectors, ambient_dim)


def intersect(*cones: RationalCone) -> RationalCone:
    """Intersection via the concatenated facet systems."""
    if not cones:
        raise ValueError("nothing to intersect")
    d = cones[0].ambient_dim
    if any(c.ambient_dim != d for c in cones):
        raise DimensionMismatchError("ambient dimensions differ")
    normals = [f for c in cones for f in c.facets]
    eqs = [e for c in cones for e in c.equations]
    return RationalCone.from_inequalities(normals, d, eqs)


def dual(cone: RationalCone) -> RationalCone:
    return cone.dual()


def contains(cone: RationalCone, v: Sequence[int]) -> bool:
    return cone.contains(v)


def facet_cones(cone: RationalCone) -> list[RationalCone]:
    return cone.facet_cones()


def in_conic_hull(generators: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """Membership by generators alone (Caratheodory enumeration).

    ``v`` lies in the cone iff it is a nonnegative combination of some
    linearly independent subset of the generators.  Exponential, but exact
    and independent of the double description code.
    """
    gens = [tuple(g) for g in generators if any(g)]
    if not any(v):
        return True
    d = len(v)
    for k in range(1, min(d, len(gens)) + 1):
        for subset in itertools.combinations(gens, k):
            if rank(subset) < k:
                continue
            x = solve(transpose(subset), v)
            if x is not None and all(c >= 0 for c in x):
                return True
    return False
