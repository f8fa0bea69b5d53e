"""JSON schemas and CSV writers.

Rule schema: piecewise-linear rules are {"d": int, "pieces": [{"g": [...],
"b": r}], "floor": r}; closed forms are {"kind": ..., "d": ...} plus their
parameters.  Structures are {"d": int, "atoms": [{"x": [...], "p": r}],
"label": str} with exact rationals encoded as "num/den" strings.  Floats
round-trip bit-exactly (shortest-repr encoding both ways).
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .geometry import (
    ConvexRule,
    PiecewiseLinearConvex,
    PyramidRule,
    SimplexPoint,
    builtin_rule,
)
from .settlement import QuadraticWitnessRule
from .structures import Collection, InfoStructure


def _encode_number(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def _decode_number(v):
    if isinstance(v, str):
        num, den = v.split("/")
        return Fraction(int(num), int(den))
    return float(v)


def point_to_json(pt: SimplexPoint) -> list:
    if pt.exact is not None:
        return [_encode_number(v) for v in pt.exact]
    return [float(v) for v in pt.coords]


def point_from_json(values) -> SimplexPoint:
    decoded = [_decode_number(v) for v in values]
    if all(isinstance(v, Fraction) for v in decoded):
        return SimplexPoint.from_exact(decoded)
    return SimplexPoint([float(v) for v in decoded])


def structure_to_json(s: InfoStructure) -> dict:
    return {
        "d": s.d,
        "atoms": [{"x": point_to_json(pt), "p": _encode_number(p)}
                  for pt, p in s.atoms],
        "label": s.label,
    }


def structure_from_json(obj: dict) -> InfoStructure:
    atoms = [(point_from_json(a["x"]), _decode_number(a["p"]))
             for a in obj["atoms"]]
    s = InfoStructure(atoms, label=obj.get("label", ""))
    if s.d != obj["d"]:
        raise ValueError(f"structure dimension {s.d} != declared {obj['d']}")
    return s


def collection_to_json(c: Collection) -> dict:
    return {
        "d": c.d,
        "label": c.label,
        "structures": [structure_to_json(s) for s in c.structures],
    }


def collection_from_json(obj: dict) -> Collection:
    return Collection([structure_from_json(s) for s in obj["structures"]],
                      label=obj.get("label", ""))


def rule_to_json(rule: ConvexRule) -> dict:
    if isinstance(rule, PyramidRule):
        return {"kind": "pyramid", "d": rule.d,
                "mean": point_to_json(rule.mean)}
    if isinstance(rule, PiecewiseLinearConvex):
        return {
            "d": rule.d,
            "pieces": [{"g": [float(v) for v in g], "b": b}
                       for g, b in rule.pieces],
            "floor": rule.floor,
        }
    if isinstance(rule, QuadraticWitnessRule):
        return {"kind": "quadratic_witness", "d": 2, "delta": rule.delta}
    if rule.kind in ("quadratic", "spherical", "log"):
        return {"kind": rule.kind, "d": rule.d}
    raise TypeError(f"cannot serialize rule of kind {rule.kind!r}")


def rule_from_json(obj: dict) -> ConvexRule:
    if "pieces" in obj:
        pieces = [(np.array(p["g"], dtype=float), float(p["b"]))
                  for p in obj["pieces"]]
        return PiecewiseLinearConvex(int(obj["d"]), pieces,
                                     floor=float(obj.get("floor", 0.0)))
    kind = obj["kind"]
    if kind == "pyramid":
        return PyramidRule(point_from_json(obj["mean"]))
    if kind == "quadratic_witness":
        return QuadraticWitnessRule(float(obj["delta"]))
    return builtin_rule(kind, int(obj["d"]))


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def format_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> None:
    """Locale-independent CSV: '.' decimals, LF endings, repr-exact floats."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")


def gain_report_rows(report) -> list:
    return [(label, j) for label, j in report.gains]
