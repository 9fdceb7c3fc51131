"""JSON/CSV file formats: spaces, kernels, couplings, certificates, providers."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .diagnostics.certificates import AsfPlusCertificate
from .diagnostics.providers import CouplingProvider, ExplicitProvider
from .errors import InputError
from .kernel import ErgodicDecomposition, Kernel
from .metric_space import MetricSpace, validate_space

SPACE_KEYS = ("states", "distance", "base_point")
KERNEL_KEYS = SPACE_KEYS + ("matrix",)


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _exact_keys(d, keys, what):
    if not isinstance(d, dict):
        raise InputError(f"{what}: expected a JSON object")
    extra = sorted(set(d) - set(keys))
    if extra:
        raise InputError(f"{what}: unknown field {extra[0]!r}")
    missing = [k for k in keys if k not in d]
    if missing:
        raise InputError(f"{what}: missing field {missing[0]!r}")


def _matrix(value, field):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"field {field!r} must be a matrix of numbers") from None
    if M.ndim != 2:
        raise InputError(f"field {field!r} must be a square matrix")
    return M


def space_from_dict(d: dict, what: str = "space") -> MetricSpace:
    _exact_keys(d, SPACE_KEYS, what)
    states = d["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise InputError(f"{what}: field 'states' must be a list of strings")
    if not isinstance(d["base_point"], int) or isinstance(d["base_point"], bool):
        raise InputError(f"{what}: field 'base_point' must be an integer")
    return validate_space(states, _matrix(d["distance"], "distance"), d["base_point"])


def space_to_dict(space: MetricSpace) -> dict:
    return {"states": list(space.labels), "distance": space.dist.tolist(), "base_point": int(space.base_index)}


def kernel_from_dict(d: dict, what: str = "kernel") -> Kernel:
    _exact_keys(d, KERNEL_KEYS, what)
    space = space_from_dict({k: d[k] for k in SPACE_KEYS}, what)
    return Kernel(space, _matrix(d["matrix"], "matrix"))


def kernel_to_dict(kernel: Kernel) -> dict:
    return {**space_to_dict(kernel.space), "matrix": kernel.matrix.tolist()}


def load_space(path) -> MetricSpace:
    return space_from_dict(_read_json(path), str(path))


def load_kernel(path) -> Kernel:
    return kernel_from_dict(_read_json(path), str(path))


def save_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def coupling_to_dict(joint, space: MetricSpace) -> dict:
    J = joint.toarray() if hasattr(joint, "toarray") else np.asarray(joint)
    return {"rows": list(space.labels), "cols": list(space.labels), "joint": J.tolist()}


def decomposition_csv(dec: ErgodicDecomposition, space: MetricSpace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class_id", "state_label", "weight"])
    for cid, (mu, members) in enumerate(zip(dec.measures, dec.class_members)):
        for i in members:
            writer.writerow([cid, space.labels[i], repr(float(mu.weights[i]))])
    return buf.getvalue()


def load_certificate(path) -> AsfPlusCertificate:
    return AsfPlusCertificate.from_dict(_read_json(path))


def provider_from_json(data, kernel: Kernel) -> CouplingProvider:
    """Explicit list of ``{x, y, t, joint}`` entries or ``{builtin, params}``."""
    from .models import builtin_provider

    if isinstance(data, dict):
        _exact_keys(data, ("builtin", "params"), "provider")
        if not isinstance(data["params"], dict):
            raise InputError("provider: field 'params' must be an object")
        return builtin_provider(data["builtin"], kernel, **data["params"])
    if not isinstance(data, list) or not data:
        raise InputError("provider: expected a non-empty list or a builtin object")
    joints = {}
    for k, entry in enumerate(data):
        _exact_keys(entry, ("x", "y", "t", "joint"), f"provider[{k}]")
        key = tuple(entry[f] for f in ("x", "y", "t"))
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in key):
            raise InputError(f"provider[{k}]: fields 'x', 'y', 't' must be integers")
        joints[key] = _matrix(entry["joint"], "joint")
    return ExplicitProvider(kernel, joints)


def load_provider(path, kernel: Kernel) -> CouplingProvider:
    return provider_from_json(_read_json(path), kernel)
