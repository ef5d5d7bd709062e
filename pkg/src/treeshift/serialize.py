"""JSON model files.

Schema::

    {"tree": {"vertices": [...], "root": id, "parent": {child: parent}},
     "weights_sq": {vertex: "p/q"},
     "tails": {anchor: {"a0": "p/q", "measure": [{"t": "p/q", "mass": "p/q"}]}
                     | {"moments": [{"s": "p/q", "w": "p/q"}]}}}

Rationals are always strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .shiftmodel import ShiftModel, StructuralError, tail_from_json
from .tree import DirectedTree, TreeError
from .verdict import fmt


class ModelFormatError(ValueError):
    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


def tree_to_json(t: DirectedTree) -> dict[str, Any]:
    return {
        "vertices": list(t.vertices),
        "root": t.root,
        "parent": {v: t.parent(v) for v in t.vertices if v != t.root},
    }


def tree_from_json(data: Any, where: str = "tree") -> DirectedTree:
    if not isinstance(data, dict):
        raise ModelFormatError(where, "expected an object")
    verts = data.get("vertices")
    root = data.get("root")
    par = data.get("parent", {})
    if not isinstance(verts, list) or not all(isinstance(v, str) for v in verts):
        raise ModelFormatError(f"{where}.vertices", "expected a list of strings")
    if not isinstance(root, str) or root not in verts:
        raise ModelFormatError(f"{where}.root", "must name one of the vertices")
    if not isinstance(par, dict):
        raise ModelFormatError(f"{where}.parent", "expected an object")
    full = {v: v for v in verts}
    for c, p in par.items():
        if c not in full:
            raise ModelFormatError(f"{where}.parent.{c}", "unknown vertex")
        if p not in full:
            raise ModelFormatError(f"{where}.parent.{c}", f"unknown parent {p!r}")
        full[c] = p
    missing = [v for v in verts if v != root and full[v] == v]
    if missing:
        raise ModelFormatError(f"{where}.parent", f"no parent given for {missing[0]!r}")
    try:
        return DirectedTree(full, root)
    except TreeError as e:
        raise ModelFormatError(where, str(e)) from None


def _q(x: Any, where: str) -> Fraction:
    if not isinstance(x, str):
        raise ModelFormatError(where, "rationals must be strings like \"p/q\"")
    try:
        return Fraction(x.strip())
    except (ValueError, ZeroDivisionError):
        raise ModelFormatError(where, f"not a rational: {x!r}") from None


def model_to_json(m: ShiftModel) -> dict[str, Any]:
    return {
        "tree": tree_to_json(m.tree),
        "weights_sq": {v: fmt(m.weights_sq[v]) for v in m.tree.vertices if v != m.root},
        "tails": {a: m.tails[a].to_json() for a in m.tree.vertices if a in m.tails},
    }


def model_from_json(data: Any, strict: bool = True) -> ShiftModel:
    """Parse a model; ``strict`` also demands properness and leaflessness."""
    if not isinstance(data, dict):
        raise ModelFormatError("$", "expected an object")
    tree = tree_from_json(data.get("tree"))
    raw_w = data.get("weights_sq", {})
    if not isinstance(raw_w, dict):
        raise ModelFormatError("weights_sq", "expected an object")
    w = {v: _q(x, f"weights_sq.{v}") for v, x in raw_w.items()}
    tails = {}
    raw_t = data.get("tails", {})
    if not isinstance(raw_t, dict):
        raise ModelFormatError("tails", "expected an object")
    for a, spec in raw_t.items():
        where = f"tails.{a}"
        if not isinstance(spec, dict):
            raise ModelFormatError(where, "expected an object")
        try:
            if "moments" in spec:
                for i, d in enumerate(spec["moments"]):
                    _q(d.get("s"), f"{where}.moments[{i}].s")
                    _q(d.get("w"), f"{where}.moments[{i}].w")
            else:
                _q(spec.get("a0"), f"{where}.a0")
                for i, d in enumerate(spec.get("measure", [])):
                    _q(d.get("t"), f"{where}.measure[{i}].t")
                    _q(d.get("mass"), f"{where}.measure[{i}].mass")
            tails[a] = tail_from_json(spec)
        except (StructuralError, ValueError, TypeError, AttributeError) as e:
            if isinstance(e, ModelFormatError):
                raise
            raise ModelFormatError(where, str(e)) from None
    try:
        m = ShiftModel(tree, w, tails, allow_zero=not strict)
        if strict:
            m.require_leafless()
    except StructuralError as e:
        raise ModelFormatError("model", str(e)) from None
    return m


def dumps_model(m: ShiftModel) -> str:
    return json.dumps(model_to_json(m), indent=2)


def loads_model(text: str, strict: bool = True) -> ShiftModel:
    return model_from_json(json.loads(text), strict)


def load_model(path: str, strict: bool = True) -> ShiftModel:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read(), strict)
