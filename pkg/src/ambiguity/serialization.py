"""JSON forms of domains, measures, explanations and reports.

``dumps`` writes floats with 17 significant digits and keeps dict insertion
order, so identical inputs produce byte-identical output.  Complex numbers
are ``[re, im]`` pairs; matrices are row-major nested lists.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping

import numpy as np

from .domains import Assignment, Detector, DetectorDomain, Knob, KnobDomain
from .errors import InvalidInput
from .measures import ParamProbMeasure, PartitionWithMetric
from .quantum import Explanation


def _emit(obj, indent: str, step: str, out: list[str]) -> None:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x!r}")
        text = format(x, ".17g")
        if not any(c in text for c in ".en"):
            text += ".0"
        out.append(text)
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, Mapping):
        if not obj:
            out.append("{}")
            return
        inner = indent + step
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(inner + json.dumps(str(k), ensure_ascii=False) + ": ")
            _emit(v, inner, step, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(indent + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not items:
            out.append("[]")
            return
        # short lists of scalars stay on one line
        if all(not isinstance(v, (Mapping, list, tuple, np.ndarray)) for v in items):
            parts: list[str] = []
            for v in items:
                _emit(v, "", "", parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        inner = indent + step
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(inner)
            _emit(v, inner, step, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(indent + "]")
    elif isinstance(obj, complex):
        _emit([obj.real, obj.imag], indent, step, out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    out: list[str] = []
    _emit(obj, "", "  ", out)
    return "".join(out) + "\n"


# -- domains ---------------------------------------------------------------


def domain_to_json(domain) -> dict:
    if isinstance(domain, KnobDomain):
        return {"knobs": [{"name": k.name, "settings": list(k.settings)} for k in domain.knobs]}
    if isinstance(domain, DetectorDomain):
        return {
            "detectors": [{"name": d.name, "outcomes": list(d.outcomes)} for d in domain.detectors]
        }
    raise TypeError(f"not a domain: {domain!r}")


def _require(obj, key: str, where: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise InvalidInput(f"{where}: missing key {key!r}")
    return obj[key]


def domain_from_json(obj):
    try:
        if isinstance(obj, Mapping) and "knobs" in obj:
            return KnobDomain(Knob(k["name"], k["settings"]) for k in obj["knobs"])
        if isinstance(obj, Mapping) and "detectors" in obj:
            return DetectorDomain(Detector(d["name"], d["outcomes"]) for d in obj["detectors"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"malformed domain: {exc}") from None
    raise InvalidInput("domain JSON needs a 'knobs' or 'detectors' list")


def knob_domain_from_json(obj) -> KnobDomain:
    d = domain_from_json(obj)
    if not isinstance(d, KnobDomain):
        raise InvalidInput("expected a knob domain")
    return d


def detector_domain_from_json(obj) -> DetectorDomain:
    d = domain_from_json(obj)
    if not isinstance(d, DetectorDomain):
        raise InvalidInput("expected a detector domain")
    return d


def assignment_to_json(a: Mapping) -> dict:
    return dict(Assignment(a).items())


def assignment_from_json(obj) -> Assignment:
    if not isinstance(obj, Mapping) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in obj.items()
    ):
        raise InvalidInput(f"setting/atom must map names to labels, got {obj!r}")
    return Assignment(obj)


# -- measures --------------------------------------------------------------


def measure_to_json(mu: ParamProbMeasure) -> dict:
    entries = []
    for i, k in enumerate(mu.settings):
        for j, w in enumerate(mu.atoms):
            entries.append({"setting": assignment_to_json(k), "atom": assignment_to_json(w), "p": float(mu.table[i, j])})
    return {
        "knobDomain": domain_to_json(mu.knob_domain),
        "detectorDomain": domain_to_json(mu.detector_domain),
        "entries": entries,
    }


def measure_from_json(obj, eps_norm: float = 1e-9) -> ParamProbMeasure:
    kd = knob_domain_from_json(_require(obj, "knobDomain", "measure"))
    dd = detector_domain_from_json(_require(obj, "detectorDomain", "measure"))
    entries = []
    for e in _require(obj, "entries", "measure"):
        entries.append(
            (
                assignment_from_json(_require(e, "setting", "entry")),
                assignment_from_json(_require(e, "atom", "entry")),
                float(_require(e, "p", "entry")),
            )
        )
    return ParamProbMeasure.from_entries(kd, dd, entries, eps_norm)


def partition_to_json(p: PartitionWithMetric) -> dict:
    return {
        "classes": [[assignment_to_json(k) for k in c] for c in p.classes],
        "distances": p.distances,
        "ambiguousPairs": [list(t) for t in p.ambiguous_pairs],
    }


# -- operators -------------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    """Row-major matrix of ``[re, im]`` pairs (bare reals are accepted too)."""
    if isinstance(obj, Mapping):
        obj = _require(obj, "matrix", "matrix")
    try:
        rows = []
        for row in obj:
            vals = []
            for z in row:
                if isinstance(z, (list, tuple)):
                    re, im = z
                    vals.append(complex(float(re), float(im)))
                else:
                    vals.append(complex(float(z)))
            rows.append(vals)
        m = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed matrix: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"matrix must be square, got shape {m.shape}")
    return m


def explanation_to_json(e: Explanation) -> dict:
    rho = [
        {"setting": assignment_to_json(k), "matrix": matrix_to_json(e.rho[i])}
        for i, k in enumerate(e.knob_domain.elements())
    ]
    povm = []
    for i, k in enumerate(e.knob_domain.elements()):
        ops = [
            {"atom": assignment_to_json(w), "matrix": matrix_to_json(e.povm[i, j])}
            for j, w in enumerate(e.detector_domain.elements())
        ]
        povm.append({"setting": assignment_to_json(k), "operators": ops})
    return {
        "dim": e.dim,
        "knobDomain": domain_to_json(e.knob_domain),
        "detectorDomain": domain_to_json(e.detector_domain),
        "rho": rho,
        "povm": povm,
    }


def explanation_from_json(obj) -> Explanation:
    kd = knob_domain_from_json(_require(obj, "knobDomain", "explanation"))
    dd = detector_domain_from_json(_require(obj, "detectorDomain", "explanation"))
    dim = int(_require(obj, "dim", "explanation"))
    rho = np.full((kd.size, dim, dim), np.nan, dtype=complex)
    povm = np.full((kd.size, dd.size, dim, dim), np.nan, dtype=complex)
    for item in _require(obj, "rho", "explanation"):
        rho[kd.index(assignment_from_json(item["setting"]))] = _sized(item["matrix"], dim)
    for item in _require(obj, "povm", "explanation"):
        i = kd.index(assignment_from_json(item["setting"]))
        for op in item["operators"]:
            povm[i, dd.index(assignment_from_json(op["atom"]))] = _sized(op["matrix"], dim)
    if np.isnan(rho.real).any() or np.isnan(povm.real).any():
        raise InvalidInput("explanation must give every state and every detection operator")
    return Explanation(kd, dd, rho, povm)


def _sized(obj, dim: int) -> np.ndarray:
    m = matrix_from_json(obj)
    if m.shape != (dim, dim):
        raise InvalidInput(f"matrix of shape {m.shape} in a dim-{dim} explanation")
    return m


def load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON ({exc})") from None
