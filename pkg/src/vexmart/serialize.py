"""JSON and CSV round-trip formats for all domain values.

JSON is the source of truth (floats emitted with Python's shortest
round-trip representation, which reconstructs the exact binary64 value);
CSV is lossy (12 significant digits) and intended only for plotting.
"""

from __future__ import annotations

import io
import json
import math
from typing import Any, Mapping, Sequence

from .errors import ValidationError
from .hardy import AtomTerm, AtomicDecomposition
from .martingale import INF, Martingale, StoppingTime, make_martingale, martingale_from_terminal
from .space import Exponent, FilteredSpace, validate_filtration


def space_to_json(space: FilteredSpace) -> dict:
    return {
        "leaf_probs": list(space.leaf_probs),
        "levels": [[list(b) for b in level] for level in space.levels],
    }


def space_from_json(obj: Mapping[str, Any]) -> FilteredSpace:
    try:
        return validate_filtration(obj["levels"], obj["leaf_probs"])
    except KeyError as exc:
        raise ValidationError(f"space JSON missing key {exc}") from exc


def exponent_to_json(p: Exponent) -> dict:
    return {"values": list(p.values)}


def exponent_from_json(obj: Mapping[str, Any]) -> Exponent:
    try:
        return Exponent(tuple(obj["values"]))
    except KeyError as exc:
        raise ValidationError(f"exponent JSON missing key {exc}") from exc


def function_to_json(values: Sequence[float]) -> dict:
    return {"values": [float(v) for v in values]}


def function_from_json(obj: Mapping[str, Any]) -> list[float]:
    try:
        return [float(v) for v in obj["values"]]
    except KeyError as exc:
        raise ValidationError(f"function JSON missing key {exc}") from exc


def martingale_to_json(f: Martingale, full: bool = False) -> dict:
    if full:
        return {"levels": [list(lv) for lv in f.levels]}
    return {"terminal": list(f.terminal)}


def martingale_from_json(space: FilteredSpace, obj: Mapping[str, Any]) -> Martingale:
    if "levels" in obj:
        return make_martingale(space, obj["levels"])
    if "terminal" in obj:
        return martingale_from_terminal(space, [float(v) for v in obj["terminal"]])
    raise ValidationError("martingale JSON needs 'terminal' or 'levels'")


def stopping_time_to_json(tau: StoppingTime) -> dict:
    return {
        "stop_level": [
            "inf" if math.isinf(t) else int(t) for t in tau.stop_level
        ]
    }


def stopping_time_from_json(obj: Mapping[str, Any]) -> StoppingTime:
    try:
        raw = obj["stop_level"]
    except KeyError as exc:
        raise ValidationError(f"stopping time JSON missing key {exc}") from exc
    return StoppingTime(
        tuple(INF if t == "inf" else float(t) for t in raw)
    )


def decomposition_to_json(dec: AtomicDecomposition) -> list:
    return [
        {
            "k": term.k,
            "mu": term.mu,
            "tau": stopping_time_to_json(term.tau)["stop_level"],
            "atom_terminal": list(term.atom_terminal),
        }
        for term in dec.terms
    ]


def decomposition_from_json(
    space: FilteredSpace, obj: Sequence[Mapping[str, Any]]
) -> AtomicDecomposition:
    terms = tuple(
        AtomTerm(
            int(t["k"]),
            float(t["mu"]),
            StoppingTime(
                tuple(INF if v == "inf" else float(v) for v in t["tau"])
            ),
            tuple(float(v) for v in t["atom_terminal"]),
        )
        for t in obj
    )
    if terms:
        return AtomicDecomposition(space, terms, terms[0].k, terms[-1].k)
    return AtomicDecomposition(space, (), 0, -1)


def dumps(obj: Any) -> str:
    """Deterministic JSON text: fixed key order as constructed, no spaces
    lost to platform differences."""
    return json.dumps(obj, indent=2, allow_nan=True)


def report_to_csv(report_obj: Mapping[str, Any]) -> str:
    """Flat (x, y) CSV for curve-type outputs, else (index, ratio)."""
    buf = io.StringIO()
    details = report_obj.get("details", {})
    curve = details.get("curve")
    if not curve:
        grid = details.get("lambda_grid")
        ratios = report_obj.get("ratios", [])
        if grid and len(grid) == len(ratios):
            curve = list(zip(grid, ratios))
    if curve:
        buf.write("x,y\n")
        for x, y in curve:
            buf.write(f"{x:.12g},{y:.12g}\n")
    else:
        buf.write("index,ratio\n")
        for i, r in enumerate(report_obj.get("ratios", [])):
            buf.write(f"{i},{r:.12g}\n")
    return buf.getvalue()
