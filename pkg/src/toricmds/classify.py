"""Deciding whether a general anticanonical hypersurface is a Mori dream space.

The pipeline looks at the primitive pairs of the fan:

* no pairs: the Cox ring is a hypersurface ring, answer yes;
* an obstructing four-vertex configuration: answer no;
* one of the four pair patterns with a known presentation: answer yes;
* the special two-pair pattern with a chained target: answer yes;
* otherwise certify each facet of a candidate effective cone with the
  negative semidefinite intersection form test, answer yes or unknown.

It also contains the facet classification of the nef cone and the checks
for the two-involution cone conjecture argument.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import sympy

from .chow import SymmetricForm, is_negative_semidefinite_nontrivial, q_matrix
from .cones import RationalCone, intersect
from .divisors import (
    BucketSpec,
    Bucket,
    DivisorClass,
    GradingData,
    anticanonical_decomposition,
    eff_cone,
    grading,
    mov_cone,
    nef_cone,
)
from .fan import FaceFan, InconsistencyError, PrimitiveRelation, face_fan, primitive_relations
from .lattice import (
    LatticePolytope,
    add,
    dot,
    identity,
    matmul,
    matvec,
    neg,
    nullspace,
    primitive,
    rank,
)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ToricData:
    """Everything the pipeline derives from a smooth Fano polytope."""

    polytope: LatticePolytope
    fan: FaceFan
    grading: GradingData
    relations: tuple[PrimitiveRelation, ...]

    @cached_property
    def eff(self) -> RationalCone:
        return eff_cone(self.grading)

    @cached_property
    def mov(self) -> RationalCone:
        return mov_cone(self.grading)

    @cached_property
    def nef(self) -> RationalCone:
        return nef_cone(self.grading, self.relations)

    @property
    def pairs(self) -> tuple[PrimitiveRelation, ...]:
        return tuple(rel for rel in self.relations if rel.is_pair)

    def is_pair(self, i: int, j: int) -> bool:
        s = tuple(sorted((i, j)))
        return any(rel.collection == s for rel in self.pairs)


def analyze(p: LatticePolytope) -> ToricData:
    fan = face_fan(p)
    return ToricData(p, fan, grading(p), primitive_relations(fan))


def _as_data(obj) -> ToricData:
    return obj if isinstance(obj, ToricData) else analyze(obj)


# ---------------------------------------------------------------------------
# configuration detectors


@dataclass(frozen=True)
class Thm2Match:
    """Obstructing configurations, 0-based vertex indices.

    ``pairs_of_opposites`` holds ``((a, b), (c, d))`` with ``v_a + v_b = 0``
    and ``v_c + v_d = 0``; ``split_opposites`` holds ``(a, b, c, d)`` with
    ``v_a + v_b = 0`` and ``v_c + v_d = v_a``.
    """

    case: str
    pairs_of_opposites: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    split_opposites: tuple[tuple[int, int, int, int], ...]

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "opposite_pairs": [[[a + 1, b + 1], [c + 1, d + 1]] for (a, b), (c, d) in self.pairs_of_opposites],
            "split": [[a + 1, b + 1, c + 1, d + 1] for a, b, c, d in self.split_opposites],
        }


def detect_thm2(p: LatticePolytope | ToricData) -> Thm2Match | None:
    """Scan ordered vertex quadruples for the two obstructing patterns."""
    poly = p.polytope if isinstance(p, ToricData) else p
    verts = poly.vertices
    index = {v: i for i, v in enumerate(verts)}
    zero = tuple([0] * poly.dim)
    opposite = sorted(
        (a, b) for a, b in itertools.combinations(range(len(verts)), 2) if add(verts[a], verts[b]) == zero
    )
    case_i = set()
    for x, y in itertools.combinations(opposite, 2):
        if not set(x) & set(y):
            case_i.add((x, y))
    case_ii = set()
    for a, b in opposite:
        for first, second in ((a, b), (b, a)):
            target = verts[first]
            for c, d in itertools.combinations(range(len(verts)), 2):
                if len({first, second, c, d}) < 4:
                    continue
                if add(verts[c], verts[d]) == target:
                    case_ii.add((first, second, c, d))
    if not case_i and not case_ii:
        return None
    tag = "both" if case_i and case_ii else ("i" if case_i else "ii")
    return Thm2Match(tag, tuple(sorted(case_i)), tuple(sorted(case_ii)))


@dataclass(frozen=True)
class Thm1Match:
    """Case tag and the vertex playing each role ``x1, x2, ...``."""

    case: str
    roles: tuple[tuple[str, int], ...]

    def role(self, name: str) -> int:
        return dict(self.roles)[name]

    def to_json(self) -> dict:
        return {"case": self.case, "roles": {k: v + 1 for k, v in self.roles}}


def _target(rel: PrimitiveRelation) -> int | None:
    if rel.degree == 1 and len(rel.rhs) == 1 and rel.rhs[0][1] == 1:
        return rel.rhs[0][0]
    return None


def detect_thm1(relations: Sequence[PrimitiveRelation]) -> Thm1Match | None:
    """Match the full set of primitive pairs against the four known patterns."""
    pairs = [rel for rel in relations if rel.is_pair]
    twos = [rel for rel in pairs if rel.degree == 2]
    ones = [rel for rel in pairs if rel.degree == 1]
    if len(pairs) == 1:
        (rel,) = pairs
        a, b = rel.collection
        if rel.degree == 2:
            return Thm1Match("ii", (("x1", a), ("x2", b)))
        t = _target(rel)
        if t is not None:
            return Thm1Match("i", (("x1", a), ("x2", b), ("x3", t)))
        return None
    if len(pairs) == 3 and len(twos) == 1 and len(ones) == 2:
        a, b = twos[0].collection
        for x1, x2 in ((a, b), (b, a)):
            for first, second in (ones, ones[::-1]):
                if x1 not in first.collection:
                    continue
                (x4,) = set(first.collection) - {x1}
                x3 = _target(first)
                if x3 is None or x4 == x2:
                    continue
                if set(second.collection) == {x2, x3} and _target(second) == x4:
                    return Thm1Match("iii", (("x1", x1), ("x2", x2), ("x3", x3), ("x4", x4)))
        return None
    if len(pairs) == 2 and len(ones) == 2:
        p1, p2 = ones
        t1, t2 = _target(p1), _target(p2)
        if t1 is None or t2 is None:
            return None
        if set(p1.collection) & set(p2.collection):
            return None
        if t1 in p2.collection or t2 in p1.collection:
            return None  # chained targets: handled separately
        x1, x2 = p1.collection
        x3, x4 = p2.collection
        return Thm1Match(
            "iv", (("x1", x1), ("x2", x2), ("x3", x3), ("x4", x4), ("x5", t1), ("x6", t2))
        )
    return None


def detect_ex117(relations: Sequence[PrimitiveRelation]) -> Thm1Match | None:
    """Two disjoint degree-one pairs where the first pair's target lies in the second."""
    pairs = [rel for rel in relations if rel.is_pair]
    if len(pairs) != 2 or any(rel.degree != 1 for rel in pairs):
        return None
    for p1, p2 in (pairs, pairs[::-1]):
        if set(p1.collection) & set(p2.collection):
            return None
        t1, t2 = _target(p1), _target(p2)
        if t1 is None or t2 is None:
            return None
        if t1 in p2.collection:
            x1, x2 = p1.collection
            (x4,) = set(p2.collection) - {t1}
            return Thm1Match("ex117", (("x1", x1), ("x2", x2), ("x3", t1), ("x4", x4), ("x5", t2)))
    return None


# ---------------------------------------------------------------------------
# Cox presentations


@dataclass(frozen=True)
class CaseTemplate:
    tag: str
    equation: str
    buckets: tuple[tuple[str, str, tuple[str, ...]], ...]  # name, monomial, exact roles
    extras: tuple[tuple[str, str], ...]  # name, monomial giving its degree
    relations: tuple[str, ...]
    needs_normalization: bool = False


TEMPLATES: dict[str, CaseTemplate] = {
    "i": CaseTemplate(
        "i",
        "f1*x1 + f2*x2",
        (("f1", "x1", ()), ("f2", "x2", ())),
        (("s", "f2/x1"),),
        ("f2 - s*x1", "f1 + s*x2"),
    ),
    "ii": CaseTemplate(
        "ii",
        "f1*x1**2 + f2*x1*x2 + f3*x2**2",
        (("f1", "x1**2", ("x1", "x2")), ("f2", "x1*x2", ("x1", "x2")), ("f3", "x2**2", ("x1", "x2"))),
        (("s1", "f3/x1"), ("s2", "f1/x2")),
        ("f3 - x1*s1", "f2 + x1*s2 + x2*s1", "f1 - x2*s2"),
    ),
    "iii": CaseTemplate(
        "iii",
        "f1*x1**2*x3 + f2*x1*x2 + f3*x2**2*x4",
        (
            ("f1", "x1**2*x3", ("x1", "x2")),
            ("f2", "x1*x2", ("x1", "x2")),
            ("f3", "x2**2*x4", ("x1", "x2")),
        ),
        (("s1", "f3/x1"), ("s2", "f1/x2")),
        ("f3 - x1*s1", "f2 + x1*x3*s2 + x2*x4*s1", "f1 - x2*s2"),
    ),
    "iv": CaseTemplate(
        "iv",
        "f1*x1*x3 + f2*x1*x4 + f3*x2*x3 + f4*x2*x4",
        (("f1", "x1*x3", ()), ("f2", "x1*x4", ()), ("f3", "x2*x3", ()), ("f4", "x2*x4", ())),
        (("s1", "x1*f2/x3"), ("s2", "x3*f3/x1")),
        (
            "f1*f4 - f2*f3 + s1*s2",
            "x2*s2 + x3*f1 + x4*f2",
            "x1*s2 - x3*f3 - x4*f4",
            "x1*f2 + x2*f4 - x3*s1",
            "x1*f1 + x2*f3 + x4*s1",
        ),
    ),
    "ex117": CaseTemplate(
        "ex117",
        "x1**2*x3*f1 + x1*x2*x3*f2 + x1*x4*f3 + x2**2*x3*f4 + x2*x4*f5",
        (
            ("f1", "x1**2*x3", ()),
            ("f2", "x1*x2*x3", ()),
            ("f3", "x1*x4", ()),
            ("f4", "x2**2*x3", ()),
            ("f5", "x2*x4", ()),
        ),
        (("s1", "x2*x3*f4/x1"), ("s2", "x1*f3/x3"), ("s3", "x3*f1*f5/x2")),
        (
            "x1*s1 - x2*x3*f4 - x4*f5",
            "x1**2*f1 + x1*x2*f2 + x2**2*f4 + x4*s2",
            "x1*f1*f5 + x2*f2*f5 - x2*f3*f4 + s1*s2",
            "x1*f3 + x2*f5 - x3*s2",
            "x2*s3 + x3*f1*f5 + f3*s1",
            "x3**2*f1*f4 + x3*f2*s1 - x4*s3 + s1**2",
            "x1*x3*f1 + x2*x3*f2 + x2*s1 + x4*f3",
            "x1*s3 - x3*f2*f5 + x3*f3*f4 - f5*s1",
            "f1*f5**2 - f2*f3*f5 + f3**2*f4 + s2*s3",
        ),
        needs_normalization=True,
    ),
}


class HomogeneityError(ValueError):
    pass


def _role_symbols(match: Thm1Match) -> dict:
    return {sympy.Symbol(name): sympy.Symbol(f"x{idx + 1}") for name, idx in match.roles}


def _degree_of(expr, degrees: dict, rho: int) -> DivisorClass:
    total = [0] * rho
    for base, e in expr.as_powers_dict().items():
        if base.is_number:
            continue
        d = degrees[base]
        total = [t + e * x for t, x in zip(total, d)]
    return tuple(int(x) for x in total)


def term_degrees(expr, degrees: dict, rho: int) -> list[DivisorClass]:
    gens = sorted(expr.free_symbols, key=str)
    poly = sympy.Poly(sympy.expand(expr), *gens)
    out = []
    for monom, _ in poly.terms():
        total = [0] * rho
        for sym, e in zip(gens, monom):
            total = [t + e * x for t, x in zip(total, degrees[sym])]
        out.append(tuple(total))
    return out


@dataclass(frozen=True)
class CoxPresentation:
    case_tag: str
    variables: tuple[tuple[str, DivisorClass], ...]
    extra_vars: tuple[tuple[str, DivisorClass], ...]
    buckets: tuple[Bucket, ...]
    equation: sympy.Expr
    relations: tuple[sympy.Expr, ...]
    needs_normalization: bool

    def degrees(self) -> dict:
        d = {sympy.Symbol(n): deg for n, deg in self.variables + self.extra_vars}
        for b in self.buckets:
            d[sympy.Symbol(b.name)] = b.degree
        return d

    def is_homogeneous(self) -> bool:
        rho = len(self.variables[0][1])
        degs = self.degrees()
        for rel in self.relations + (self.equation,):
            if len(set(term_degrees(rel, degs, rho))) != 1:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "case": self.case_tag,
            "extra_vars": {n: list(d) for n, d in self.extra_vars},
            "buckets": {
                b.name: {"degree": list(b.degree), "monomials": len(b.members)} for b in self.buckets
            },
            "equation": str(self.equation),
            "relations": [str(r) for r in self.relations],
            "normalization_required": self.needs_normalization,
        }


def emit_cox_presentation(match: Thm1Match, data: LatticePolytope | ToricData) -> CoxPresentation:
    """Instantiate the template of ``match.case`` with actual bucket degrees."""
    data = _as_data(data)
    g = data.grading
    tpl = TEMPLATES[match.case]
    roles = dict(match.roles)
    specs = []
    for name, mono, exact in tpl.buckets:
        powers = sympy.sympify(mono).as_powers_dict()
        monomial = tuple(sorted((roles[str(s)], int(e)) for s, e in powers.items()))
        specs.append(BucketSpec(name, monomial, frozenset(roles[x] for x in exact)))
    buckets = anticanonical_decomposition(data.polytope, g, specs)
    rename = _role_symbols(match)
    variables = tuple((f"x{i + 1}", g.ray_class(i)) for i in range(g.r))
    degs = {sympy.Symbol(n): d for n, d in variables}
    for b in buckets:
        degs[sympy.Symbol(b.name)] = b.degree
    extras = []
    for name, mono in tpl.extras:
        expr = sympy.sympify(mono).xreplace(rename)
        deg = _degree_of(expr, degs, g.picard_rank)
        extras.append((name, deg))
        degs[sympy.Symbol(name)] = deg
    equation = sympy.sympify(tpl.equation).xreplace(rename)
    relations = tuple(sympy.sympify(r).xreplace(rename) for r in tpl.relations)
    pres = CoxPresentation(
        match.case, variables, tuple(extras), buckets, equation, relations, tpl.needs_normalization
    )
    if not pres.is_homogeneous():
        raise HomogeneityError(f"inhomogeneous relation in case {match.case}")
    return pres


def equivalent_up_to_renaming(
    ours: Sequence, theirs: Sequence, free_ours: Sequence[str], free_theirs: Sequence[str]
) -> dict | None:
    """Find a renaming with signs of the free symbols matching two relation lists.

    Relations are compared up to an overall sign.  Returns the renaming
    (symbol name -> (sign, target name)) or None.
    """
    if len(ours) != len(theirs) or len(free_ours) != len(free_theirs):
        return None
    a_syms = [sympy.Symbol(s) for s in free_ours]
    b_syms = [sympy.Symbol(s) for s in free_theirs]
    theirs_e = [sympy.expand(sympy.sympify(t)) for t in theirs]
    for perm in itertools.permutations(b_syms):
        for signs in itertools.product((1, -1), repeat=len(a_syms)):
            sub = {a: s * b for a, b, s in zip(a_syms, perm, signs)}
            mapped = [sympy.expand(sympy.sympify(r).xreplace(sub)) for r in ours]
            remaining = list(theirs_e)
            ok = True
            for m in mapped:
                hit = next((k for k, t in enumerate(remaining) if m - t == 0 or m + t == 0), None)
                if hit is None:
                    ok = False
                    break
                remaining.pop(hit)
            if ok:
                return {str(a): (s, str(b)) for a, b, s in zip(a_syms, perm, signs)}
    return None


# ---------------------------------------------------------------------------
# involutions


@dataclass(frozen=True)
class InvolutionAction:
    """Action on the class group of the involution attached to a pair ``v_a + v_b = 0``."""

    matrix: tuple[tuple[int, ...], ...]
    pair: tuple[int, int]

    def apply(self, cls: Sequence[int]) -> DivisorClass:
        return matvec(self.matrix, cls)

    def fixes(self, cls: Sequence[int]) -> bool:
        return self.apply(cls) == tuple(cls)

    def to_json(self) -> dict:
        return {"pair": [self.pair[0] + 1, self.pair[1] + 1], "matrix": [list(r) for r in self.matrix]}


def involution_action(data: LatticePolytope | ToricData, pair: Sequence[int]) -> InvolutionAction:
    data = _as_data(data)
    a, b = pair
    verts = data.polytope.vertices
    zero = tuple([0] * data.polytope.dim)
    if add(verts[a], verts[b]) != zero or not data.is_pair(a, b):
        raise ConfigurationError("not a degree-two primitive pair")
    g = data.grading
    w = g.classes
    r = g.r
    others = [j for j in range(r) if j not in (a, b)]
    partners = {
        x: {j for j in others if data.is_pair(x, j)} for x in (a, b)
    }
    index = {v: i for i, v in enumerate(verts)}

    def total(idx):
        s = tuple([0] * g.picard_rank)
        for j in idx:
            s = add(s, w[j])
        return s

    images: list[DivisorClass] = [None] * r  # type: ignore[list-item]
    images[a] = add(neg(w[b]), total(j for j in others if j not in partners[a]))
    images[b] = add(neg(w[a]), total(j for j in others if j not in partners[b]))
    for i in others:
        targets = {index[s] for s in (add(verts[a], verts[i]), add(verts[b], verts[i])) if s in index}
        if len(targets) > 1:
            raise InconsistencyError("ambiguous image of a ray class")
        images[i] = w[targets.pop()] if targets else w[i]
    image_q = tuple(tuple(img[k] for img in images) for k in range(g.picard_rank))
    m = matmul(image_q, g.lift)
    if matmul(m, g.matrix) != image_q:
        raise InconsistencyError("ray images do not define a linear map on the class group")
    if matmul(m, m) != identity(g.picard_rank):
        raise InconsistencyError("action is not an involution")
    return InvolutionAction(m, (a, b))


def involutions(data: ToricData) -> list[InvolutionAction]:
    return [involution_action(data, rel.collection) for rel in data.pairs if rel.degree == 2]


# ---------------------------------------------------------------------------
# TestFace


@dataclass(frozen=True)
class TestFaceResult:
    passed: bool
    witness: DivisorClass | None = None
    q: SymmetricForm | None = None
    rank: int = 0
    source: str = ""

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "A": list(self.witness) if self.witness is not None else None,
            "A_source": self.source or None,
            "q": self.q.to_json() if self.q is not None else None,
            "rank": self.rank,
        }


def testface(
    data: ToricData,
    face_rays: Sequence[DivisorClass],
    extra_witnesses: Sequence[tuple[DivisorClass, str]] = (),
) -> TestFaceResult:
    """Look for a movable class ``A`` whose form on the face is nonzero and NSD.

    The rays of the movable cone of the ambient variety are tried first, in
    order; ``extra_witnesses`` (class, label) are tried afterwards.
    """
    omegas = [tuple(w) for w in face_rays]
    pool = [(a, "mov-ray") for a in data.mov.rays] + list(extra_witnesses)
    for a, label in pool:
        q = q_matrix(data.grading, data.fan, a, omegas)
        nsd, rk = is_negative_semidefinite_nontrivial(q)
        if nsd and rk > 0:
            return TestFaceResult(True, a, q, rk, label)
    return TestFaceResult(False)


def involution_witnesses(data: ToricData, invs: Sequence[InvolutionAction]) -> list[tuple[DivisorClass, str]]:
    """Images of the movable rays under the involutions, not already movable rays.

    The involutions are isomorphisms in codimension one of the hypersurface,
    so these classes are movable on it even when they leave the ambient
    movable cone.
    """
    seen = set(data.mov.rays)
    out = []
    for s in invs:
        for a in data.mov.rays:
            b = s.apply(a)
            if b not in seen:
                seen.add(b)
                out.append((b, f"sigma{s.pair[0] + 1},{s.pair[1] + 1}(mov-ray)"))
    return out


testface.__test__ = False  # not a pytest test despite the name
TestFaceResult.__test__ = False


def candidate_cone(data: ToricData, invs: Sequence[InvolutionAction]) -> RationalCone:
    gens = list(data.eff.rays)
    for s in invs:
        gens.extend(s.apply(r) for r in data.eff.rays)
    return RationalCone.from_generators(gens, data.grading.picard_rank)


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassificationVerdict:
    name: str
    dim: int
    mds: str
    method: str
    witness: dict = field(default_factory=dict)
    presentation: CoxPresentation | None = None

    @property
    def index(self):
        if self.name.startswith("grdb:") and self.name[5:].isdigit():
            return int(self.name[5:])
        return self.name

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "dim": self.dim,
            "mds": self.mds,
            "method": self.method,
            "witness": self.witness,
        }


def classify(
    p: LatticePolytope | ToricData, name: str = "", extended_witnesses: bool = True
) -> ClassificationVerdict:
    """Run the decision pipeline.

    With ``extended_witnesses`` the facet test may fall back to involution
    images of movable rays; without it only the ambient movable rays are
    used.
    """
    data = _as_data(p)
    n = data.polytope.dim
    if not data.pairs:
        return ClassificationVerdict(name, n, "yes", "no-pairs")
    t2 = detect_thm2(data)
    if t2 is not None:
        return ClassificationVerdict(name, n, "no", f"thm2-{t2.case}", t2.to_json())
    m = detect_thm1(data.relations)
    if m is None:
        m = detect_ex117(data.relations)
    if m is not None:
        pres = emit_cox_presentation(m, data)
        method = "ex117" if m.case == "ex117" else f"thm1-{m.case}"
        witness = {"configuration": m.to_json(), "presentation": pres.to_json()}
        return ClassificationVerdict(name, n, "yes", method, witness, pres)
    invs = involutions(data)
    extras = involution_witnesses(data, invs) if extended_witnesses else []
    cone = candidate_cone(data, invs)
    facets = []
    all_ok = True
    for face in cone.facet_cones():
        variants = [("self", list(face.rays))]
        for s in invs:
            variants.append((f"sigma{s.pair[0] + 1},{s.pair[1] + 1}", [s.apply(r) for r in face.rays]))
        res, used = TestFaceResult(False), "self"
        # the ambient movable rays on every variant before any fallback class
        for pool in ((), extras) if extras else ((),):
            for label, rays in variants:
                res = testface(data, rays, pool) if pool else testface(data, rays)
                if res.passed:
                    used = label
                    break
            if res.passed:
                break
        all_ok = all_ok and res.passed
        facets.append({"rays": [list(r) for r in face.rays], "via": used, **res.to_json()})
    witness = {
        "cone": cone.to_json(),
        "involutions": [s.to_json() for s in invs],
        "facets": facets,
    }
    return ClassificationVerdict(name, n, "yes" if all_ok else "unknown", "testface", witness)


def classify_many(records, workers: int | None = None) -> list[ClassificationVerdict]:
    """Classify ``(name, polytope)`` pairs; results keep input order."""
    items = list(records)
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_classify_item, items))
    return [_classify_item(it) for it in items]


def _classify_item(item) -> ClassificationVerdict:
    name, poly = item
    return classify(poly, name)


# ---------------------------------------------------------------------------
# nef facets and the cone conjecture


FIBER = "fiber-1dim"
DIVISORIAL = "divisorial-1dim"
SMALL = "small"
MOV_FACET = "mov-facet"


def facet_relations(data: ToricData, normal: Sequence[int]) -> list[PrimitiveRelation]:
    """Primitive relations whose curve class spans the ray dual to a nef facet."""
    out = []
    for rel in data.relations:
        y = data.grading.curve_class(rel.vector(data.grading.r))
        if rank([y, normal]) == 1 and dot(y, normal) > 0:
            out.append(rel)
    return out


def nef_facet_status(data: LatticePolytope | ToricData, normal: Sequence[int]) -> str:
    """Contraction type of the nef facet with the given (curve-class) normal."""
    data = _as_data(data)
    rels = facet_relations(data, normal)
    if not rels:
        raise InconsistencyError("no primitive relation spans the dual ray of this facet")
    if any(r.is_pair and r.degree == 2 for r in rels):
        return FIBER
    if any(r.is_pair and r.degree == 1 for r in rels):
        return DIVISORIAL
    if any(r.ell >= 2 for r in rels):
        return SMALL
    return MOV_FACET


@dataclass
class ConeConjectureReport:
    picard_rank: int
    statuses: list[tuple[tuple[int, ...], str]]
    hypotheses: dict[str, bool]
    notes: list[str]
    phi1: InvolutionAction | None = None
    phi2: InvolutionAction | None = None
    fixed_class: DivisorClass | None = None
    h: tuple | None = None
    walls: tuple = ()

    @property
    def passed(self) -> bool:
        return all(self.hypotheses.values())

    def to_json(self) -> dict:
        return {
            "picard_rank": self.picard_rank,
            "facets": [{"normal": list(n), "status": s} for n, s in self.statuses],
            "hypotheses": self.hypotheses,
            "passed": self.passed,
            "e": list(self.fixed_class) if self.fixed_class else None,
            "h": [list(r) for r in self.h] if self.h else None,
            "involutions": [x.to_json() for x in (self.phi1, self.phi2) if x is not None],
            "notes": self.notes,
        }


def _matpow(m, k: int):
    out = identity(len(m))
    for _ in range(k):
        out = matmul(out, m)
    return out


def _minus_identity(m):
    return tuple(tuple(x - int(i == j) for j, x in enumerate(row)) for i, row in enumerate(m))


def cone_conjecture_check(p: LatticePolytope | ToricData) -> ConeConjectureReport:
    data = _as_data(p)
    nef = data.nef
    rho = data.grading.picard_rank
    statuses = [(f, nef_facet_status(data, f)) for f in nef.facets]
    hyps = {
        "involutions": False,
        "fixed_class": False,
        "reflecting_walls": False,
        "other_facets_mov": False,
    }
    notes: list[str] = []
    fibers = [f for f, s in statuses if s == FIBER]
    hyps["other_facets_mov"] = all(s == MOV_FACET for f, s in statuses if s != FIBER) and len(fibers) == 2
    report = ConeConjectureReport(rho, statuses, hyps, notes)
    if len(fibers) != 2:
        notes.append(f"{len(fibers)} facets of fiber type with one-dimensional fibers, need 2")
        return report
    actions = []
    for f in fibers:
        rel = next(r for r in facet_relations(data, f) if r.is_pair and r.degree == 2)
        actions.append(involution_action(data, rel.collection))
    phi1, phi2 = actions
    report.phi1, report.phi2 = phi1, phi2
    ident = identity(rho)
    hyps["involutions"] = all(matmul(a.matrix, a.matrix) == ident for a in actions)

    # common fixed class generating the unipotent eigenspace
    stacked = [list(r) for r in _minus_identity(phi1.matrix)] + [list(r) for r in _minus_identity(phi2.matrix)]
    fixed = nullspace(stacked, rho)
    h = matmul(phi1.matrix, phi2.matrix)
    report.h = h
    nil = _minus_identity(h)
    unipotent = not any(any(row) for row in _matpow(nil, rho))
    eigen_dim = rho - rank(nil)
    e = None
    if len(fixed) == 1:
        cand = primitive(fixed[0])
        if nef.contains(cand):
            e = cand
        elif nef.contains(neg(cand)):
            e = neg(cand)
    if e is None:
        notes.append("no unique common fixed class in the nef cone")
    if not unipotent:
        notes.append("composition is not unipotent")
    if eigen_dim != 1:
        notes.append(f"fixed space of the composition has dimension {eigen_dim}")
    report.fixed_class = e
    hyps["fixed_class"] = e is not None and unipotent and eigen_dim == 1

    # each involution fixes its facet pointwise and reflects nef across it
    walls_ok = True
    walls = []
    for f, act in zip(fibers, actions):
        wall = RationalCone.from_generators([x for x in nef.rays if dot(f, x) == 0], rho)
        walls.append(wall)
        fixes = all(act.apply(x) == x for x in wall.rays)
        image = nef.image(act.matrix)
        meet = intersect(nef, image)
        across = image != nef and meet == wall
        if not (fixes and across):
            walls_ok = False
            notes.append(f"facet {list(f)} is not the reflecting wall of its involution")
    report.walls = tuple(walls)
    hyps["reflecting_walls"] = walls_ok
    return report


@dataclass
class TilingReport:
    chambers: list[tuple[str, RationalCone]]
    diagnostics: dict

    def to_json(self) -> dict:
        return {
            "chambers": [{"word": w, **c.to_json()} for w, c in self.chambers],
            "diagnostics": self.diagnostics,
        }


def tiling_explorer(
    phi1: InvolutionAction,
    phi2: InvolutionAction,
    nef: RationalCone,
    depth: int,
    fixed_class: Sequence[int] | None = None,
) -> TilingReport:
    """Chambers ``h^k(Nef)`` and ``phi1 h^k(Nef)`` for ``|k| <= depth``."""
    rho = nef.ambient_dim
    a, b = phi1.matrix, phi2.matrix
    h = matmul(a, b)
    h_inv = matmul(b, a)
    elements: list[tuple[str, tuple]] = []
    for k in range(-depth, depth + 1):
        hk = _matpow(h, k) if k >= 0 else _matpow(h_inv, -k)
        elements.append((f"h^{k}", hk))
        elements.append((f"phi1 h^{k}", matmul(a, hk)))
    chambers = [(word, nef.image(g)) for word, g in elements]
    cones = [c for _, c in chambers]
    diag: dict = {"count": len(chambers)}
    diag["distinct"] = len(set(cones)) == len(cones)

    disjoint = True
    for i, j in itertools.combinations(range(len(cones)), 2):
        if intersect(cones[i], cones[j]).dim == rho:
            disjoint = False
            break
    diag["disjoint_interiors"] = disjoint

    # walls of Nef: the two reflecting ones and the rest
    fiber_normals = []
    for act in (phi1, phi2):
        fixed = [f for f in nef.facets if all(act.apply(x) == x for x in nef.rays if dot(f, x) == 0)]
        fiber_normals.append(fixed[0] if fixed else None)
    wall_kind = {}
    for f in nef.facets:
        if f == fiber_normals[0]:
            wall_kind[f] = 0
        elif f == fiber_normals[1]:
            wall_kind[f] = 1
        else:
            wall_kind[f] = None
    by_matrix = {g: idx for idx, (_, g) in enumerate(elements)}
    adjacency_ok = True
    outer_ok = True
    shared_reflecting = 0
    frontier = 0
    outer = 0
    for idx, (word, g) in enumerate(elements):
        for f in nef.facets:
            wall = RationalCone.from_generators(
                [matvec(g, x) for x in nef.rays if dot(f, x) == 0], rho
            )
            kind = wall_kind[f]
            neighbours = [
                j for j, c in enumerate(cones) if j != idx and c.contains_cone(wall)
            ]
            if kind is None:
                outer += 1
                if neighbours:
                    outer_ok = False
                continue
            reflect = (a, b)[kind]
            partner = by_matrix.get(matmul(g, reflect))
            if partner is None:
                frontier += 1
                # the only neighbour allowed is the missing chamber
                if neighbours:
                    adjacency_ok = False
                continue
            shared_reflecting += 1
            if neighbours != [partner] or intersect(cones[idx], cones[partner]) != wall:
                adjacency_ok = False
    diag["adjacent_along_reflecting_walls"] = adjacency_ok
    diag["outer_walls_mov_translates"] = outer_ok
    diag["walls"] = {"reflecting_shared": shared_reflecting, "frontier": frontier, "mov_translates": outer}

    if fixed_class is not None:
        diag["max_angle_by_k"] = _angles(elements, nef, fixed_class, depth)
        seq = diag["max_angle_by_k"]
        mono = True
        for side in (range(0, depth + 1), range(0, -depth - 1, -1)):
            vals = [seq[str(k)] for k in side]
            if any(y > x + 1e-12 for x, y in zip(vals[1:], vals[2:])):
                mono = False
        diag["angles_decrease"] = mono
    return TilingReport(chambers, diag)


def _angles(elements, nef, e, depth) -> dict:
    norm_e = math.sqrt(sum(x * x for x in e))
    out = {}
    for k in range(-depth, depth + 1):
        g = dict(elements)[f"h^{k}"]
        worst = 0.0
        for x in nef.rays:
            y = matvec(g, x)
            ny = math.sqrt(sum(t * t for t in y))
            c = max(-1.0, min(1.0, dot(y, e) / (ny * norm_e)))
            worst = max(worst, math.acos(c))
        out[str(k)] = worst
    return out


def cone_family(n: int, i: int) -> LatticePolytope:
    """Vertices ``e_1..e_n, -e_1-...-e_{n-2}+i e_n, -e_{n-1}, -e_n``."""
    if n < 3 or not 0 <= i <= n - 2:
        raise ValueError("need n >= 3 and 0 <= i <= n-2")
    e = [tuple(int(k == j) for k in range(n)) for j in range(n)]
    extra = tuple(-1 if k < n - 2 else (i if k == n - 1 else 0) for k in range(n))
    return LatticePolytope(e + [extra, neg(e[n - 2]), neg(e[n - 1])])
gen_family = cone_family
