"""Class group grading, divisor cones and anticanonical sections.

Divisor classes are integer tuples in the basis of :class:`GradingData`
(the rows of ``Q``).  The class of ``D_i`` is column ``i`` of ``Q``.  The
same coordinates are used for classes on the toric variety and on a
general anticanonical hypersurface, whose class groups are identified by
restriction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .cones import RationalCone, intersect
from .fan import FaceFan, PrimitiveRelation
from .lattice import (
    LatticePolytope,
    det,
    dot,
    hnf,
    hnf_basis,
    integer_kernel,
    lattice_points,
    matmul,
    matvec,
    polar,
    transpose,
)

DivisorClass = tuple


class StructuralError(ValueError):
    """An anticanonical monomial does not fit the expected bucket pattern."""


@dataclass(frozen=True)
class GradingData:
    """The degree matrix ``Q`` (rows: basis of the relation lattice).

    ``lift`` is an ``r x rho`` integer matrix with ``Q * lift = I`` used to
    turn classes back into torus-invariant divisors.
    """

    matrix: tuple[tuple[int, ...], ...]
    lift: tuple[tuple[int, ...], ...]
    basis_tag: str = "hnf"

    @property
    def r(self) -> int:
        return len(self.matrix[0])

    @property
    def picard_rank(self) -> int:
        return len(self.matrix)

    @property
    def classes(self) -> tuple[DivisorClass, ...]:
        return transpose(self.matrix)

    def ray_class(self, i: int) -> DivisorClass:
        return tuple(row[i] for row in self.matrix)

    @property
    def anticanonical(self) -> DivisorClass:
        return tuple(sum(row) for row in self.matrix)

    def class_of(self, divisor: Sequence[int]) -> DivisorClass:
        """Class of ``sum_i divisor[i] * D_i``."""
        return matvec(self.matrix, divisor)

    def lift_class(self, cls: Sequence[int]) -> tuple[int, ...]:
        """A torus-invariant divisor with the given class."""
        return matvec(self.lift, cls)

    def curve_class(self, relation_vector: Sequence[int]) -> tuple[int, ...]:
        """Coordinates ``y`` with ``Q^T y`` equal to the relation vector.

        The intersection of a class ``x`` with that curve is ``x . y``.
        """
        y = matvec(transpose(self.lift), relation_vector)
        if matvec(transpose(self.matrix), y) != tuple(relation_vector):
            raise ValueError("vector is not in the relation lattice")
        return y

    def to_json(self) -> dict:
        return {"Q": [list(r) for r in self.matrix], "basis": self.basis_tag}


def grading(p: LatticePolytope) -> GradingData:
    """HNF-canonical saturated kernel basis of the vertex matrix."""
    q = integer_kernel(p.vertex_matrix(), p.num_vertices)
    h, u = hnf(transpose(q))
    rho = len(q)
    top = h[:rho]
    if any(any(row) for row in h[rho:]) or top != tuple(
        tuple(int(i == j) for j in range(rho)) for i in range(rho)
    ):
        raise ValueError("ray classes do not generate the class group")
    lift = transpose(u[:rho])
    return GradingData(q, lift)


def classes_match_up_to_unimodular(q1: Sequence[Sequence[int]], q2: Sequence[Sequence[int]]) -> bool:
    """Do the two matrices have the same row lattice?"""
    return hnf_basis(q1) == hnf_basis(q2)


def basis_change(g: GradingData, target: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Unimodular ``U`` with ``U * g.matrix == target``.

    Classes in ``g``'s coordinates are sent to ``target``'s by ``x -> U x``.
    """
    u = matmul(target, g.lift)
    if matmul(u, g.matrix) != tuple(tuple(r) for r in target) or abs(det(u)) != 1:
        raise ValueError("target grading is not a change of basis of this one")
    return u


# -- cones ---------------------------------------------------------------


def eff_cone(g: GradingData) -> RationalCone:
    return RationalCone.from_generators(g.classes, g.picard_rank)


def mov_cone(g: GradingData) -> RationalCone:
    w = g.classes
    parts = [
        RationalCone.from_generators([w[j] for j in range(len(w)) if j != i], g.picard_rank)
        for i in range(len(w))
    ]
    return intersect(*parts)


def mori_cone(g: GradingData, relations: Sequence[PrimitiveRelation]) -> RationalCone:
    """Cone of curves, generated by all primitive relations, in curve coordinates."""
    curves = [g.curve_class(rel.vector(g.r)) for rel in relations]
    return RationalCone.from_generators(curves, g.picard_rank)


def nef_cone(g: GradingData, relations: Sequence[PrimitiveRelation]) -> RationalCone:
    return mori_cone(g, relations).dual()


# -- anticanonical monomials -------------------------------------------------


@dataclass(frozen=True)
class AnticanonicalMonomial:
    dual_point: tuple[int, ...]
    exponents: tuple[int, ...]


def anticanonical_monomials(p: LatticePolytope) -> tuple[AnticanonicalMonomial, ...]:
    """Monomials ``prod x_i^(<m, v_i> + 1)`` for ``m`` in the polar's lattice points."""
    out = []
    for m in lattice_points(polar(p)):
        exps = tuple(dot(m, v) + 1 for v in p.vertices)
        out.append(AnticanonicalMonomial(m, exps))
    return tuple(out)


def pair_multiplicity(p: LatticePolytope, i: int, j: int) -> int:
    """Vanishing order of a general anticanonical section along ``x_i = x_j = 0``."""
    return min(m.exponents[i] + m.exponents[j] for m in anticanonical_monomials(p))


@dataclass(frozen=True)
class BucketSpec:
    """A distinguished monomial ``prod x_k^e_k``.

    Exponents of variables in ``exact`` must agree; the others only need
    to be at least the given exponent.
    """

    name: str
    monomial: tuple[tuple[int, int], ...]
    exact: frozenset[int] = frozenset()

    def matches(self, exponents: Sequence[int]) -> bool:
        mono = dict(self.monomial)
        for k in self.exact:
            if exponents[k] != mono.get(k, 0):
                return False
        return all(exponents[k] >= e for k, e in mono.items())


@dataclass(frozen=True)
class Bucket:
    name: str
    monomial: tuple[tuple[int, int], ...]
    degree: DivisorClass
    members: tuple[AnticanonicalMonomial, ...]


def anticanonical_decomposition(
    p: LatticePolytope, g: GradingData, specs: Sequence[BucketSpec]
) -> tuple[Bucket, ...]:
    """Split the anticanonical monomials among the buckets, first match wins.

    Every monomial must land in some bucket; otherwise the configuration
    was misdetected and a :class:`StructuralError` is raised.  Bucket
    degrees are ``-K`` minus the class of the distinguished monomial.
    """
    members: dict[str, list[AnticanonicalMonomial]] = {s.name: [] for s in specs}
    for m in anticanonical_monomials(p):
        for s in specs:
            if s.matches(m.exponents):
                members[s.name].append(m)
                break
        else:
            raise StructuralError(f"monomial with exponents {m.exponents} fits no bucket")
    out = []
    k = g.anticanonical
    for s in specs:
        divisor = [0] * g.r
        for i, e in s.monomial:
            divisor[i] += e
        deg = tuple(a - b for a, b in zip(k, g.class_of(divisor)))
        for m in members[s.name]:
            rest = [e - divisor[i] for i, e in enumerate(m.exponents)]
            if g.class_of(rest) != deg:
                raise StructuralError("bucket member of the wrong degree")
        out.append(Bucket(s.name, s.monomial, deg, tuple(members[s.name])))
    return tuple(out)


def irrelevant_codim2_components(fan: FaceFan) -> list[tuple[int, int]]:
    """Pairs ``{i, j}`` with ``V(x_i, x_j)`` a component of the irrelevant locus.

    The irrelevant ideal is generated by ``prod_{k not in sigma} x_k`` over
    maximal cones ``sigma``; its minimal primes are the minimal transversals
    of those supports.  No single variable is a transversal (every ray lies
    in a cone), so the height-two primes are exactly the two-element
    transversals.
    """
    r = fan.num_rays
    complements = [frozenset(range(r)) - c for c in fan.maximal_cones]
    out = []
    for i in range(r):
        for j in range(i + 1, r):
            if all(i in s or j in s for s in complements):
                out.append((i, j))
    return out
