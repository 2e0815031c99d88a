"""Command line front end and polytope data files.

Text data files hold blocks of the form::

    # comment
    id grdb:35
    4 7
    1 0 0 0 -1 0 0
    ...

i.e. an optional ``id`` line, a header ``n r`` and ``n`` rows of ``r``
integers (the vertices are the columns).  A JSON file holds either one
object ``{"id": ..., "dim": n, "vertices": [[...], ...]}`` with vertices as
rows, or a list of them.
"""

from __future__ import annotations

import argparse
import importlib
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import chow
from .divisors import mori_cone, pair_multiplicity
from .fan import FanError, InconsistencyError, is_extremal
from .lattice import DegeneracyError, LatticePolytope, NotInteriorError, is_reflexive, is_smooth, is_terminal

# the package namespace exports the classify() function under the module's name
clf = importlib.import_module(".classify", __package__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3

BUNDLED = ("dim3.polytopes", "examples.polytopes", "appendix_a.polytopes")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.line, self.column, self.source = line, column, source
        where = f"{source}:{line}:{column}: " if line else (f"{source}: " if source else "")
        super().__init__(where + message)


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class PolytopeRecord:
    id: str
    dim: int
    vertices: tuple[tuple[int, ...], ...]
    source: str = ""

    @property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(v[k] for v in self.vertices) for k in range(self.dim))

    def polytope(self) -> LatticePolytope:
        try:
            return LatticePolytope(self.vertices)
        except (ValueError, DegeneracyError) as exc:
            raise PreconditionError(f"{self.id}: {exc}") from exc


# ---------------------------------------------------------------------------
# parsing


def _ints(tokens: list[tuple[int, str]], lineno: int, source: str) -> list[int]:
    out = []
    for col, tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"expected an integer, got {tok!r}", lineno, col, source) from None
    return out


def _tokens(line: str) -> list[tuple[int, str]]:
    out, col = [], 0
    for piece in line.split():
        col = line.index(piece, col)
        out.append((col + 1, piece))
        col += len(piece)
    return out


def parse_text(text: str, source: str = "<text>") -> list[PolytopeRecord]:
    records: list[PolytopeRecord] = []
    pending_id: str | None = None
    header: tuple[int, int] | None = None
    rows: list[list[int]] = []
    start = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = _tokens(line)
        if toks[0][1] == "id":
            if header is not None:
                raise ParseError("id line inside a matrix block", lineno, toks[0][0], source)
            if len(toks) != 2:
                raise ParseError("id line needs exactly one name", lineno, toks[0][0], source)
            if pending_id is not None:
                raise ParseError("two id lines in a row", lineno, toks[0][0], source)
            pending_id = toks[1][1]
            continue
        values = _ints(toks, lineno, source)
        if header is None:
            if len(values) != 2 or values[0] < 1 or values[1] < 1:
                raise ParseError("expected a header 'n r'", lineno, toks[0][0], source)
            header = (values[0], values[1])
            start = lineno
            rows = []
            continue
        n, r = header
        if len(values) != r:
            col = toks[min(len(toks), r) - 1][0] if len(values) > r else len(line.rstrip()) + 1
            raise ParseError(f"row has {len(values)} entries, expected {r}", lineno, col, source)
        rows.append(values)
        if len(rows) == n:
            name = pending_id or f"{Path(source).name}#{len(records) + 1}"
            verts = tuple(tuple(rows[k][j] for k in range(n)) for j in range(r))
            records.append(PolytopeRecord(name, n, verts, source))
            pending_id, header = None, None
    if header is not None:
        raise ParseError(f"block starting at line {start} is truncated", start, 1, source)
    if pending_id is not None:
        raise ParseError(f"id {pending_id!r} without a matrix", 0, 0, source)
    _check_unique(records, source)
    return records


def parse_json(text: str, source: str = "<json>") -> list[PolytopeRecord]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    items = obj if isinstance(obj, list) else [obj]
    records = []
    for k, item in enumerate(items, start=1):
        if not isinstance(item, dict) or "vertices" not in item:
            raise ParseError(f"entry {k} has no 'vertices'", 0, 0, source)
        verts = item["vertices"]
        if not verts or not all(isinstance(v, list) for v in verts):
            raise ParseError(f"entry {k}: vertices must be a list of rows", 0, 0, source)
        dim = item.get("dim", len(verts[0]))
        if any(len(v) != dim or not all(isinstance(x, int) for x in v) for v in verts):
            raise ParseError(f"entry {k}: every vertex needs {dim} integers", 0, 0, source)
        name = str(item.get("id", f"{Path(source).name}#{k}"))
        records.append(PolytopeRecord(name, dim, tuple(tuple(v) for v in verts), source))
    _check_unique(records, source)
    return records


def _check_unique(records: Sequence[PolytopeRecord], source: str) -> None:
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise ParseError(f"duplicate id {rec.id!r}", 0, 0, source)
        seen.add(rec.id)


def load_datafile(path: str | Path) -> list[PolytopeRecord]:
    """Records from a text or JSON polytope file (JSON if it starts with ``{`` or ``[``)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), 0, 0, str(path)) from None
    if text.lstrip()[:1] in ("{", "["):
        return parse_json(text, str(path))
    return parse_text(text, str(path))


def serialize(records: Sequence[PolytopeRecord]) -> str:
    blocks = []
    for rec in records:
        cols = rec.columns
        width = max(len(str(x)) for row in cols for x in row)
        lines = [f"id {rec.id}", f"{rec.dim} {len(rec.vertices)}"]
        lines += [" ".join(str(x).rjust(width) for x in row) for row in cols]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("toricmds") / "data" / name))


def bundled_records() -> list[PolytopeRecord]:
    out, seen = [], set()
    for name in BUNDLED:
        for rec in load_datafile(bundled_path(name)):
            if rec.id not in seen:
                seen.add(rec.id)
                out.append(rec)
    return out


def resolve_file(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    b = bundled_path(arg)
    if b.exists():
        return b
    raise ParseError("no such file", 0, 0, arg)


def select(args) -> list[PolytopeRecord]:
    records = load_datafile(resolve_file(args.file)) if args.file else bundled_records()
    if getattr(args, "all", False) or (args.file and not args.id and len(records) == 1):
        return records
    if not args.id:
        raise PreconditionError("give --id or --all")
    hits = [r for r in records if r.id == args.id]
    if not hits:
        raise PreconditionError(f"unknown id {args.id!r}")
    return hits


# ---------------------------------------------------------------------------
# subcommands


def _one(args) -> tuple[PolytopeRecord, clf.ToricData]:
    recs = select(args)
    if len(recs) != 1:
        raise PreconditionError("this command works on a single polytope; use --id")
    rec = recs[0]
    return rec, _analyze(rec)


def _analyze(rec: PolytopeRecord) -> clf.ToricData:
    p = rec.polytope()
    try:
        return clf.analyze(p)
    except (FanError, NotInteriorError) as exc:
        raise PreconditionError(f"{rec.id}: {exc}") from exc


def _fmt(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def cmd_inspect(args, out) -> dict:
    rec = select(args)
    if len(rec) != 1:
        raise PreconditionError("inspect works on a single polytope; use --id")
    rec = rec[0]
    p = rec.polytope()
    info = {
        "id": rec.id,
        "dim": p.dim,
        "vertices": [list(v) for v in p.vertices],
        "facets": len(p.facets),
        "fano": p.has_interior_origin(),
        "reflexive": is_reflexive(p),
        "terminal": is_terminal(p),
        "smooth": is_smooth(p),
    }
    if not args.json:
        for k, v in info.items():
            if k == "vertices":
                out.write("vertices: " + " ".join(_fmt(x) for x in v) + "\n")
            else:
                out.write(f"{k}: {v}\n")
    return info


def cmd_relations(args, out) -> dict:
    rec, data = _one(args)
    rows = []
    for rel in data.relations:
        row = rel.to_json()
        row["text"] = str(rel)
        row["extremal"] = is_extremal(data.relations, rel, data.grading.r)
        if rel.is_pair:
            row["multiplicity"] = pair_multiplicity(data.polytope, *rel.collection)
        rows.append(row)
        if not args.json:
            extra = f"  mu={row['multiplicity']}" if rel.is_pair else ""
            flag = "  extremal" if row["extremal"] else ""
            out.write(f"{row['text']}  (degree {rel.degree}){extra}{flag}\n")
    return {"id": rec.id, "relations": rows}


def cmd_grading(args, out) -> dict:
    rec, data = _one(args)
    g = data.grading
    info = {"id": rec.id, **g.to_json(), "classes": [list(w) for w in g.classes], "anticanonical": list(g.anticanonical)}
    if not args.json:
        out.write(f"Picard rank {g.picard_rank}\n")
        for row in g.matrix:
            out.write(" ".join(f"{x:3d}" for x in row) + "\n")
        for i, w in enumerate(g.classes, start=1):
            out.write(f"D{i} = {_fmt(w)}\n")
        out.write(f"-K = {_fmt(g.anticanonical)}\n")
    return info


def cmd_cones(args, out) -> dict:
    rec, data = _one(args)
    cones = {
        "eff": data.eff,
        "mov": data.mov,
        "nef": data.nef,
        "mori": mori_cone(data.grading, data.relations),
    }
    if not args.json:
        for name, c in cones.items():
            out.write(f"{name}: rays {' '.join(_fmt(r) for r in c.rays)}\n")
    return {"id": rec.id, **{k: c.to_json() for k, c in cones.items()}}


def _parse_rays(text: str, r: int) -> list[int]:
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise PreconditionError(f"bad --rays value {text!r}") from None
    if any(not 1 <= i <= r for i in idx):
        raise PreconditionError(f"ray indices must lie in 1..{r}")
    return [i - 1 for i in idx]


def cmd_chow(args, out) -> dict:
    rec, data = _one(args)
    if not args.rays:
        raise PreconditionError("chow needs --rays i,j,...")
    idx = _parse_rays(args.rays, data.grading.r)
    if len(idx) != data.polytope.dim:
        raise PreconditionError(f"need exactly {data.polytope.dim} ray indices")
    value = chow.intersection_number(data.fan, idx)
    if not args.json:
        out.write(f"{value}\n")
    return {"id": rec.id, "rays": [i + 1 for i in idx], "value": value}


def cmd_testface(args, out) -> dict:
    rec, data = _one(args)
    if data.polytope.dim < 3:
        raise PreconditionError("the facet test needs dimension at least 3")
    if args.rays:
        idx = _parse_rays(args.rays, data.grading.r)
        faces = [[data.grading.ray_class(i) for i in idx]]
    else:
        invs = clf.involutions(data)
        faces = [list(f.rays) for f in clf.candidate_cone(data, invs).facet_cones()]
    rows = []
    for face in faces:
        res = clf.testface(data, face)
        rows.append({"face": [list(w) for w in face], **res.to_json()})
        if not args.json:
            verdict = "pass" if res.passed else "fail"
            wit = f" A={_fmt(res.witness)} q={res.q.to_json()}" if res.passed else ""
            out.write(f"{' '.join(_fmt(w) for w in face)}: {verdict}{wit}\n")
    return {"id": rec.id, "faces": rows}


def cmd_classify(args, out) -> dict | list:
    recs = select(args)
    verdicts = clf.classify_many([(r.id, _polytope_or_raise(r)) for r in recs], workers=args.workers)
    rows = [v.to_json() for v in verdicts]
    if not args.json:
        for v in verdicts:
            out.write(f"{v.name}\tdim {v.dim}\tmds {v.mds}\t{v.method}\n")
    elif len(rows) > 1 or args.all:
        for row in rows:
            out.write(json.dumps(row, sort_keys=True) + "\n")
        return None  # already written as JSON lines
    return rows if len(rows) > 1 else rows[0]


def _polytope_or_raise(rec: PolytopeRecord) -> LatticePolytope:
    p = rec.polytope()
    if not is_smooth(p):
        raise PreconditionError(f"{rec.id}: polytope is not smooth Fano")
    return p


def render_table(verdicts: Sequence[clf.ClassificationVerdict]) -> str:
    """Group verdicts by dimension, answer and method."""
    groups: dict[tuple[int, str, str], list[str]] = {}
    for v in verdicts:
        groups.setdefault((v.dim, v.mds, v.method), []).append(str(v.index))
    order = {"yes": 0, "no": 1, "unknown": 2}
    lines = [f"{'dim':>3}  {'MDS':<7}  {'method':<10}  indices"]
    for (dim, mds, method), idx in sorted(groups.items(), key=lambda t: (t[0][0], order[t[0][1]], t[0][2])):
        lines.append(f"{dim:>3}  {mds:<7}  {method:<10}  {', '.join(idx)}")
    return "\n".join(lines) + "\n"


def cmd_report(args, out) -> dict | None:
    args.all = True
    recs = [r for r in select(args) if is_smooth(r.polytope())]
    verdicts = clf.classify_many([(r.id, r.polytope()) for r in recs], workers=args.workers)
    if args.json:
        return {"rows": [v.to_json() for v in verdicts]}
    out.write(render_table(verdicts))
    return None


def cmd_cone_conjecture(args, out) -> dict:
    rec, data = _one(args)
    if data.polytope.dim < 4:
        raise PreconditionError("the cone conjecture check targets dimension at least 4")
    rep = clf.cone_conjecture_check(data)
    info = {"id": rec.id, **rep.to_json()}
    tiling = None
    if rep.passed and args.depth is not None:
        tiling = clf.tiling_explorer(rep.phi1, rep.phi2, data.nef, args.depth, rep.fixed_class)
        info["tiling"] = tiling.diagnostics
    if not args.json:
        out.write(f"Picard rank {rep.picard_rank}\n")
        for normal, status in rep.statuses:
            out.write(f"nef facet {_fmt(normal)}: {status}\n")
        for name, ok in rep.hypotheses.items():
            out.write(f"{name}: {'pass' if ok else 'FAIL'}\n")
        for note in rep.notes:
            out.write(f"note: {note}\n")
        if rep.fixed_class:
            out.write(f"e = {_fmt(rep.fixed_class)}\n")
        if tiling is not None:
            d = tiling.diagnostics
            for key in ("count", "distinct", "disjoint_interiors", "adjacent_along_reflecting_walls",
                        "outer_walls_mov_translates", "angles_decrease"):
                if key in d:
                    out.write(f"tiling {key}: {d[key]}\n")
    return info


def cmd_gen_family(args, out) -> dict:
    if args.n is None or args.i is None:
        raise PreconditionError("gen-family needs --n and --i")
    try:
        p = clf.cone_family(args.n, args.i)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc
    rec = PolytopeRecord(f"family:n={args.n},i={args.i}", p.dim, p.vertices)
    if not args.json:
        out.write(serialize([rec]))
    return {"id": rec.id, "dim": rec.dim, "vertices": [list(v) for v in rec.vertices]}


COMMANDS = {
    "inspect": cmd_inspect,
    "relations": cmd_relations,
    "grading": cmd_grading,
    "cones": cmd_cones,
    "chow": cmd_chow,
    "testface": cmd_testface,
    "classify": cmd_classify,
    "cone-conjecture": cmd_cone_conjecture,
    "report": cmd_report,
    "gen-family": cmd_gen_family,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toricmds", description="Toric Fano polytopes and their anticanonical hypersurfaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--json", action="store_true", help="machine readable output")
        if name == "gen-family":
            sp.add_argument("--n", type=int)
            sp.add_argument("--i", type=int)
            continue
        sp.add_argument("--id", help="record id, e.g. grdb:35")
        sp.add_argument("--file", help="data file (path or bundled file name)")
        if name in ("classify", "report"):
            sp.add_argument("--all", action="store_true", help="every record in the file")
            sp.add_argument("--workers", type=int, default=None)
        if name in ("chow", "testface"):
            sp.add_argument("--rays", help="comma separated 1-based ray indices")
        if name == "cone-conjecture":
            sp.add_argument("--depth", type=int, default=None, help="tiling depth R")
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, FanError, InconsistencyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.json and result is not None:
        out.write(json.dumps(result, sort_keys=True) + "\n")
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
