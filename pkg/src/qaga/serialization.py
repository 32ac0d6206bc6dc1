"""JSON formats for models and sample sets.

Model document::

    {"num_vars": 2, "h": {"1": 1.0, "2": -1.0}, "J": {"1,2": -1.0}, "offset": 0.0}

Every variable appears in ``h`` (zero biases included) so the variable set
survives a round trip. Coupler keys are written ``"i,j"`` with ``i < j``;
either order is accepted on read. Floats use ``repr``, which round-trips
exactly.

Sample set document::

    {"samples": [{"assignment": {"1": 1, "2": -1}, "energy": 3.0}], "model_digest": "..."}
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .ising import DomainMismatchError, IsingModel
from .samples import SampleSet

__all__ = [
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "loads_model",
    "save_model",
    "load_model",
    "model_digest",
    "sampleset_to_dict",
    "sampleset_from_dict",
]


def model_to_dict(model: IsingModel) -> dict:
    return {
        "num_vars": model.num_vars,
        "h": {str(v): model.h.get(v, 0.0) for v in model.variables},
        "J": {f"{i},{j}": c for (i, j), c in model.J.items()},
        "offset": model.offset,
    }


def model_from_dict(doc: dict) -> IsingModel:
    if not isinstance(doc, dict):
        raise ValueError("model document must be a JSON object")
    try:
        h = {int(k): float(v) for k, v in doc.get("h", {}).items()}
        J = {}
        for key, value in doc.get("J", {}).items():
            i, j = (int(p) for p in key.split(","))
            J[(i, j)] = float(value)
        offset = float(doc.get("offset", 0.0))
    except (AttributeError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed model document: {exc}") from exc
    model = IsingModel(h, J, offset=offset)
    if "num_vars" in doc and int(doc["num_vars"]) != model.num_vars:
        raise ValueError(f"num_vars={doc['num_vars']} but the document defines {model.num_vars} variables")
    return model


def dumps_model(model: IsingModel, **kwargs) -> str:
    return json.dumps(model_to_dict(model), allow_nan=False, **kwargs)


def loads_model(text: str) -> IsingModel:
    """Parse a model; :class:`json.JSONDecodeError` carries line and column on bad syntax."""
    return model_from_dict(json.loads(text))


def save_model(model: IsingModel, path) -> None:
    Path(path).write_text(dumps_model(model, indent=1) + "\n")


def load_model(path) -> IsingModel:
    return loads_model(Path(path).read_text())


def model_digest(model: IsingModel) -> str:
    canonical = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode()).hexdigest()


def sampleset_to_dict(sampleset: SampleSet, model: IsingModel | None = None) -> dict:
    model = model if model is not None else sampleset.model
    labels = [str(v) for v in sampleset.labels]
    samples = [
        {"assignment": dict(zip(labels, row)), "energy": float(e)}
        for row, e in zip(sampleset.spins.tolist(), sampleset.energies.tolist())
    ]
    return {"samples": samples, "model_digest": model_digest(model) if model is not None else None}


def sampleset_from_dict(doc: dict, model: IsingModel) -> SampleSet:
    """Parse a sample set for ``model``; energies are recomputed, stored ones ignored.

    Raises:
        ValueError: structurally malformed document.
        DomainMismatchError: a sample does not cover exactly the model's variables.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("samples"), list):
        raise ValueError("sample set document needs a 'samples' list")
    if not doc["samples"]:
        raise ValueError("sample set document has no samples")
    rows = []
    for k, entry in enumerate(doc["samples"]):
        if not isinstance(entry, dict) or not isinstance(entry.get("assignment"), dict):
            raise ValueError(f"sample {k} has no 'assignment' object")
        try:
            assignment = {int(v): int(s) for v, s in entry["assignment"].items()}
        except (TypeError, ValueError) as exc:
            raise ValueError(f"sample {k}: {exc}") from exc
        try:
            rows.append(model.spin_vector(assignment))
        except DomainMismatchError as exc:
            raise DomainMismatchError(f"sample {k}: {exc}") from exc
    spins = np.stack(rows) if model.num_vars else np.zeros((len(rows), 0), dtype=np.int8)
    return SampleSet(model.variables, spins, model=model)
