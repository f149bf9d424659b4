"""JSON encodings for multivectors, chains, forms, maps, cells and homotopies.

Chains are written as

    {"n": 2, "k": 1, "terms": [{"point": [0.5, 0.0], "alpha": {"1": 1.0}}]}

with ``alpha`` keyed by 1-based index tuples.  On input, ``alpha`` may also
be a dense coefficient list, a number (grade 0), or ``{"vectors": [...]}``
for a simple multivector; keys need not be sorted ("2,1" means -e_12).
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .chains import DiracChain
from .domains import domain_from_json
from .errors import DimensionError, GradeError
from .exterior import MultiVector
from .forms import FormField
from .homotopy import HomotopyMap
from .maps import MapField
from .operators import AffineCell


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load(source):
    """Parse JSON from a path or an inline JSON string."""
    if isinstance(source, (dict, list)):
        return source
    text = str(source)
    path = Path(text)
    if not text.lstrip().startswith(("{", "[")):
        if not path.exists():
            raise FileNotFoundError(f"no such file: {text}")
        text = path.read_text()
    return json.loads(text)


def multivector_to_json(mv: MultiVector) -> dict:
    return {"n": mv.n, "k": mv.k, "coeffs": mv.to_dict()}


def multivector_from_json(obj, n: int | None = None, k: int | None = None) -> MultiVector:
    if isinstance(obj, (int, float)):
        if n is None:
            raise DimensionError("ambient dimension needed for a scalar multivector")
        if k not in (None, 0):
            raise GradeError(f"a number is a grade-0 multivector, expected grade {k}")
        return MultiVector.scalar(n, float(obj))
    if isinstance(obj, list):
        if n is None or k is None:
            raise DimensionError("n and k are needed for a dense coefficient list")
        return MultiVector(n, k, np.asarray(obj, dtype=float))
    if "vectors" in obj:
        mv = MultiVector.from_vectors(obj["vectors"], n=n)
    else:
        n = obj.get("n", n)
        k = obj.get("k", k)
        coeffs = obj.get("coeffs", obj)
        if isinstance(coeffs, list):
            return MultiVector(n, k, np.asarray(coeffs, dtype=float))
        mv = MultiVector.from_dict(n, k, coeffs)
    if (n is not None and mv.n != n) or (k is not None and mv.k != k):
        raise GradeError(f"multivector of grade {mv.k} in R^{mv.n}, expected grade {k} in R^{n}")
    return mv


def chain_to_json(chain: DiracChain) -> dict:
    return {
        "n": chain.n,
        "k": chain.k,
        "terms": [{"point": list(p), "alpha": a.to_dict()} for p, a in chain.terms],
    }


def chain_from_json(obj) -> DiracChain:
    obj = load(obj)
    n, k = int(obj["n"]), int(obj["k"])
    terms = []
    for term in obj.get("terms", []):
        point = [float(v) for v in term["point"]]
        if len(point) != n:
            raise DimensionError(f"point {point} is not in R^{n}")
        terms.append((point, multivector_from_json(term["alpha"], n, k)))
    return DiracChain.from_terms(n, k, terms)


def form_from_json(obj, n: int | None = None) -> FormField:
    """A form from JSON, or from text such as ``"x dy"`` when given a plain string."""
    if isinstance(obj, str):
        stripped = obj.strip()
        if stripped.startswith("{") or Path(stripped).exists():
            return form_from_json(load(stripped), n)
        return FormField.parse(stripped, n=n)
    if "text" not in obj and "n" not in obj and n is not None:
        obj = dict(obj, n=n)
    return FormField.from_json(obj)


def battery_from_json(obj, n: int | None = None) -> list[FormField]:
    obj = load(obj)
    items = obj.get("forms", []) if isinstance(obj, dict) else obj
    return [form_from_json(f, n) for f in items]


def map_from_json(obj) -> MapField:
    obj = load(obj)
    return MapField(obj["components"], obj["variables"], domain_from_json(obj.get("domain")),
                    domain_from_json(obj.get("codomain")))


def homotopy_from_json(obj) -> HomotopyMap:
    obj = load(obj)
    domain = domain_from_json(obj.get("domain"))
    codomain = domain_from_json(obj.get("codomain"))
    if "radial" in obj:
        return HomotopyMap.radial(obj["radial"]["center"], obj.get("variables"), domain, codomain)
    return HomotopyMap(obj["components"], obj.get("variables"), obj.get("time", "t"), domain, codomain)


def cell_from_json(obj) -> AffineCell:
    return AffineCell.from_json(load(obj))
