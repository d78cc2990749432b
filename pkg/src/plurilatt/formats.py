"""JSON, CSV and SVG serialization of surfaces, weight fields, Gram matrices and vertex fields.

Complex numbers are written as ``[re, im]``; readers also accept plain numbers.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .fields import ScalarField
from .lagrangian import CubeGram
from .lattice import VERTEX_LABELS, Plaquette, QuadSurface
from .weights import KINDS, ConstraintTriple, MoutardCoeffs, WeightField, orient

DATA_FIELDS = {
    "complex_p": ("p",),
    "three_point": ("p",),
    "pair_pq": ("p", "q"),
    "coupled_pq": ("p", "q"),
    "moutard_abc": ("a", "b", "c"),
    "triangular": ("a", "b"),
    "offdiagonal": ("a", "c"),
    "qnet": ("c_ij", "c_ji", "s"),
}


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(x) -> complex:
    if isinstance(x, bool):
        raise SchemaError(f"expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(t, (int, float)) for t in x):
        return complex(x[0], x[1])
    if isinstance(x, dict) and set(x) == {"re", "im"}:
        return complex(x["re"], x["im"])
    raise SchemaError(f"expected a number or [re, im], got {x!r}")


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing key {key!r}")
    return obj[key]


def _int_list(x, where) -> tuple:
    if not isinstance(x, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in x):
        raise SchemaError(f"{where}: expected a list of integers, got {x!r}")
    return tuple(x)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc})") from exc


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


# --- surfaces -------------------------------------------------------------------


def surface_to_json(surface: QuadSurface) -> dict:
    return {
        "dim": surface.dim,
        "plaquettes": [{"base": list(p.base), "dirs": list(p.dirs), "sign": p.sign} for p in surface],
    }


def surface_from_json(obj) -> QuadSurface:
    items = _require(obj, "plaquettes", "surface")
    if not isinstance(items, list):
        raise SchemaError("surface: 'plaquettes' must be a list")
    out = []
    for a, item in enumerate(items):
        where = f"surface plaquette {a}"
        base = _int_list(_require(item, "base", where), where)
        dirs = _int_list(_require(item, "dirs", where), where)
        sign = item.get("sign", 1)
        try:
            out.append(Plaquette(base, dirs, sign))
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    dim = obj.get("dim")
    if dim is not None and any(len(p.base) != dim for p in out):
        raise SchemaError(f"surface: plaquette dimension differs from dim={dim}")
    return QuadSurface(out)


# --- weight fields ----------------------------------------------------------------


def _datum_to_json(kind, datum) -> dict:
    names = DATA_FIELDS[kind]
    if kind in ("complex_p", "three_point"):
        datum = (datum,)
    return {name: complex_to_json(x) for name, x in zip(names, tuple(datum))}


def _datum_from_json(kind, obj, where):
    values = tuple(complex_from_json(_require(obj, name, where)) for name in DATA_FIELDS[kind])
    if kind in ("complex_p", "three_point"):
        return values[0]
    if kind == "moutard_abc":
        return MoutardCoeffs(*values)
    return values


def weights_to_json(field: WeightField, family: str = None) -> dict:
    out = {
        "kind": field.kind,
        "dim": field.dim,
        "constraint": None if field.constraint is None else [complex_to_json(x) for x in field.constraint.as_tuple()],
        "values": [
            {"base": list(base), "dirs": list(dirs), "data": _datum_to_json(field.kind, datum)}
            for (base, dirs), datum in sorted(field.values.items())
        ],
    }
    if family is not None:
        out["family"] = family
    return out


def weights_from_json(obj) -> WeightField:
    kind = _require(obj, "kind", "weights")
    if kind not in KINDS:
        raise SchemaError(f"weights: unknown kind {kind!r}; expected one of {KINDS}")
    constraint = obj.get("constraint")
    if constraint is not None:
        if not isinstance(constraint, list) or len(constraint) != 3:
            raise SchemaError("weights: 'constraint' must be [lambda, mu, nu] or null")
        constraint = ConstraintTriple(*(complex_from_json(x) for x in constraint))
    items = _require(obj, "values", "weights")
    if not isinstance(items, list):
        raise SchemaError("weights: 'values' must be a list")
    values = {}
    for a, item in enumerate(items):
        where = f"weights entry {a}"
        base = _int_list(_require(item, "base", where), where)
        dirs = _int_list(_require(item, "dirs", where), where)
        try:
            p = Plaquette(base, dirs)
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
        datum = _datum_from_json(kind, _require(item, "data", where), where)
        if not p.is_canonical:
            # Data given on σ^ji is stored on σ^ij as seen with the opposite orientation.
            datum = orient(kind, datum, -1)
        if p.key in values:
            raise SchemaError(f"{where}: plaquette {p.key} given twice")
        values[p.key] = datum
    return WeightField(kind, values, constraint)


# --- Gram matrices -------------------------------------------------------------------


def gram_to_json(gram: CubeGram) -> dict:
    return {
        "cube": {"base": list(gram.cube.base), "dirs": list(gram.cube.dirs)},
        "vertices": list(VERTEX_LABELS),
        "re": gram.matrix.real.tolist(),
        "im": gram.matrix.imag.tolist(),
    }


def gram_to_csv(gram: CubeGram) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row", "col", "re", "im"])
    for r in range(8):
        for c in range(8):
            z = gram.matrix[r, c]
            writer.writerow([VERTEX_LABELS[r], VERTEX_LABELS[c], repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


# --- vertex fields --------------------------------------------------------------------


def field_to_json(field) -> dict:
    points = sorted(field)
    return {
        "dim": len(points[0]) if points else None,
        "values": [
            {"point": list(p), "re": complex(field[p]).real, "im": complex(field[p]).imag} for p in points
        ],
    }


def field_from_json(obj) -> ScalarField:
    items = _require(obj, "values", "field")
    if not isinstance(items, list):
        raise SchemaError("field: 'values' must be a list")
    out = ScalarField()
    for a, item in enumerate(items):
        where = f"field entry {a}"
        point = _int_list(_require(item, "point", where), where)
        re = _require(item, "re", where)
        im = item.get("im", 0.0)
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
            raise SchemaError(f"{where}: 're' and 'im' must be numbers")
        out[point] = complex(re, im)
    return out


def field_to_csv(field) -> str:
    points = sorted(field)
    dim = len(points[0]) if points else 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"n{a + 1}" for a in range(dim)] + ["re", "im"])
    for p in points:
        z = complex(field[p])
        writer.writerow(list(p) + [repr(z.real), repr(z.imag)])
    return buf.getvalue()


def field_from_csv(text: str) -> ScalarField:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][-2:] != ["re", "im"]:
        raise SchemaError("field CSV needs a header ending in 're,im'")
    dim = len(rows[0]) - 2
    out = ScalarField()
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != dim + 2:
            raise SchemaError(f"field CSV line {line}: expected {dim + 2} columns")
        try:
            out[tuple(int(x) for x in row[:dim])] = complex(float(row[dim]), float(row[dim + 1]))
        except ValueError as exc:
            raise SchemaError(f"field CSV line {line}: {exc}") from exc
    return out


def _colour(t: float) -> str:
    # Blue through white to red.
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        s = t / 0.5
        rgb = (int(255 * s), int(255 * s), 255)
    else:
        s = (1 - t) / 0.5
        rgb = (255, int(255 * s), int(255 * s))
    return "#%02x%02x%02x" % rgb


def field_to_svg(field, surface: QuadSurface, cell: int = 24, part: str = "re") -> str:
    """Heatmap of a field on a planar patch; each plaquette is filled with its vertex mean."""
    dirs = {p.key[1] for p in surface}
    if len(dirs) != 1:
        raise ValueError("SVG export needs a planar patch with a single plaquette direction pair")
    (i, j) = dirs.pop()
    fixed = {tuple(x for a, x in enumerate(p.base) if a + 1 not in (i, j)) for p in surface}
    if len(fixed) != 1:
        raise ValueError("SVG export needs all plaquettes in one coordinate plane")
    pick = np.real if part == "re" else np.imag
    cells = []
    for p in surface:
        value = float(pick(np.mean([complex(field[v]) for v in p.vertices])))
        cells.append((p.base[i - 1], p.base[j - 1], value))
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    lo, hi = min(c[2] for c in cells), max(c[2] for c in cells)
    span = hi - lo if hi > lo else 1.0
    x0, y1 = min(xs), max(ys)
    width = (max(xs) - x0 + 1) * cell
    height = (y1 - min(ys) + 1) * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for x, y, value in sorted(cells):
        parts.append(
            f'<rect x="{(x - x0) * cell}" y="{(y1 - y) * cell}" width="{cell}" height="{cell}" '
            f'fill="{_colour((value - lo) / span)}"><title>{value:.6g}</title></rect>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
