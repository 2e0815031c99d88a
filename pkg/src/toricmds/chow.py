"""Intersection numbers on smooth complete toric varieties.

A cycle is a formal combination of orbit closures ``V(sigma)``.  Multiplying
by ``D_i`` either extends a cone by ray ``i`` or, when ``i`` already lies in
the cone, first trades ``D_i`` for a linearly equivalent divisor supported
away from a maximal cone containing it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .cones import RationalCone
from .divisors import DivisorClass, GradingData
from .fan import FaceFan, FanError
from .lattice import (
    Halfspace,
    LatticePolytope,
    det,
    dot,
    halfspace_vertices,
    normalized_volume,
    rank,
    rref,
    solve,
)


@dataclass(frozen=True)
class InvariantCycle:
    terms: Mapping[frozenset[int], int]
    codim: int

    def degree(self) -> int:
        return sum(self.terms.values())


@lru_cache(maxsize=None)
def _dual_vector(fan: FaceFan, cone: frozenset[int], i: int) -> tuple:
    """``m`` with ``<m, v_i> = -1`` and ``<m, v_k> = 0`` for the other rays of ``cone``."""
    idx = sorted(cone)
    rows = [fan.rays[k] for k in idx]
    rhs = [-1 if k == i else 0 for k in idx]
    return solve(rows, rhs)


@lru_cache(maxsize=None)
def _times_ray(fan: FaceFan, sigma: frozenset[int], i: int) -> tuple[tuple[frozenset[int], int], ...]:
    """``D_i . V(sigma)`` as a combination of orbit closures of one dimension more."""
    if i not in sigma:
        ext = sigma | {i}
        return ((ext, 1),) if fan.is_face(ext) else ()
    tau = fan.maximal_cones_containing(sigma)[0]  # lexicographically least extension
    m = _dual_vector(fan, tau, i)
    out: dict[frozenset[int], int] = {}
    for k in range(fan.num_rays):
        if k in tau:
            continue
        c = dot(m, fan.rays[k])
        if c == 0:
            continue
        ext = sigma | {k}
        if fan.is_face(ext):
            out[ext] = out.get(ext, 0) + c
    return tuple(sorted(((s, c) for s, c in out.items() if c), key=lambda t: sorted(t[0])))


def _check_fan(fan: FaceFan) -> None:
    if not fan.smooth:
        raise FanError("intersection numbers need a smooth fan")


def multiply(fan: FaceFan, cycle: InvariantCycle, divisor: Sequence[int]) -> InvariantCycle:
    """Cycle times ``sum_i divisor[i] * D_i``."""
    out: dict[frozenset[int], int] = {}
    for sigma, c in cycle.terms.items():
        for i, a in enumerate(divisor):
            if not a:
                continue
            for tau, b in _times_ray(fan, sigma, i):
                out[tau] = out.get(tau, 0) + a * b * c
    return InvariantCycle({s: c for s, c in out.items() if c}, cycle.codim + 1)


def unit_cycle() -> InvariantCycle:
    return InvariantCycle({frozenset(): 1}, 0)


def intersect_divisors(fan: FaceFan, divisors: Sequence[Sequence[int]]) -> int:
    """Degree of the product of ``n`` torus-invariant divisors (ray coefficients)."""
    _check_fan(fan)
    if len(divisors) != fan.dim:
        raise ValueError(f"need exactly {fan.dim} divisors")
    cyc = unit_cycle()
    for d in divisors:
        cyc = multiply(fan, cyc, d)
    return cyc.degree()


def intersection_number(fan: FaceFan, rays: Sequence[int]) -> int:
    """``D_{i_1} ... D_{i_n}`` for a multiset of (0-based) ray indices."""
    r = fan.num_rays
    return intersect_divisors(fan, [[int(k == i) for k in range(r)] for i in rays])


def intersection_of_classes(g: GradingData, fan: FaceFan, classes: Sequence[DivisorClass]) -> int:
    return intersect_divisors(fan, [g.lift_class(c) for c in classes])


@dataclass(frozen=True)
class SymmetricForm:
    entries: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def to_json(self) -> list:
        return [list(r) for r in self.entries]


def q_matrix(
    g: GradingData, fan: FaceFan, a: DivisorClass, omegas: Sequence[DivisorClass]
) -> SymmetricForm:
    """``(A^(n-3) . X . w_i . w_j)`` with ``X`` the anticanonical class.

    For fourfolds this is the matrix ``A . X . w_i . w_j``; for threefolds
    it is the intersection form ``X . w_i . w_j`` on the surface ``X``.
    """
    _check_fan(fan)
    n = fan.dim
    if n < 3:
        raise ValueError("q-matrices need dimension at least 3")
    base = unit_cycle()
    lift_a = g.lift_class(a)
    for _ in range(n - 3):
        base = multiply(fan, base, lift_a)
    base = multiply(fan, base, g.lift_class(g.anticanonical))
    lifts = [g.lift_class(w) for w in omegas]
    partial = [multiply(fan, base, w) for w in lifts]
    s = len(omegas)
    entries = [[0] * s for _ in range(s)]
    for i in range(s):
        for j in range(i, s):
            v = multiply(fan, partial[i], lifts[j]).degree()
            entries[i][j] = entries[j][i] = v
    return SymmetricForm(tuple(map(tuple, entries)))


def _as_rows(q) -> list[list[int]]:
    return [list(r) for r in (q.entries if isinstance(q, SymmetricForm) else q)]


def form_rank(q) -> int:
    rows = _as_rows(q)
    return rank(rows) if rows else 0


def is_negative_semidefinite_nontrivial(q) -> tuple[bool, int]:
    """(NSD by signed principal minors, rank)."""
    rows = _as_rows(q)
    s = len(rows)
    if any(rows[i][j] != rows[j][i] for i in range(s) for j in range(s)):
        raise ValueError("form is not symmetric")
    nsd = True
    for k in range(1, s + 1):
        for idx in itertools.combinations(range(s), k):
            minor = det([[rows[i][j] for j in idx] for i in idx])
            if (-1) ** k * minor < 0:
                nsd = False
                break
        if not nsd:
            break
    return nsd, form_rank(rows)


def section_polytope_vertices(p: LatticePolytope, divisor: Sequence[int]) -> list[tuple]:
    hs = [Halfspace(tuple(v), a) for v, a in zip(p.vertices, divisor)]
    return halfspace_vertices(hs, p.dim)


def nef_volume_oracle(
    p: LatticePolytope, g: GradingData, nef: RationalCone, a: DivisorClass
) -> int:
    """``A^n`` as ``n!`` times the volume of ``{m : <m, v_i> >= -a_i}``."""
    if not nef.contains(a):
        raise ValueError("class is not nef")
    verts = section_polytope_vertices(p, g.lift_class(a))
    if len(verts) <= p.dim:
        return 0
    p0 = verts[0]
    if rank([[x - y for x, y in zip(v, p0)] for v in verts[1:]]) < p.dim:
        return 0
    vol = normalized_volume(LatticePolytope(verts))
    if isinstance(vol, Fraction):
        raise ValueError("non-integral normalized volume")
    return vol
