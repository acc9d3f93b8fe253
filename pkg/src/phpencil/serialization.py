"""JSON formats for matrices, systems and restoration reports.

A complex matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` with
the entries row-major.  Floats are emitted with Python's shortest
round-trip representation, so parse(serialize(x)) is bit-exact and repeated
runs with the same seed produce byte-identical files.  System files bundle
the port-Hamiltonian and descriptor forms under one ``format_version``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .systems import DescriptorSystem, PHSystem

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed or unsupported JSON payload."""


def matrix_to_json(m) -> dict[str, Any]:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise FormatError(f"matrix payloads must be 2-d, got shape {arr.shape}")
    data = [[float(z.real), float(z.imag)] for z in arr.flatten(order="C")]
    return {"rows": int(arr.shape[0]), "cols": int(arr.shape[1]), "data": data}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"not a matrix payload: {exc}") from exc
    if len(data) != rows * cols:
        raise FormatError(f"matrix payload has {len(data)} entries, expected {rows * cols}")
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape((rows, cols), order="C")


def _check_version(obj) -> None:
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {version!r}")


def system_to_json(
    descriptor: DescriptorSystem,
    ph: PHSystem | None = None,
    seed: int | None = None,
) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "n": descriptor.n,
        "m": descriptor.m,
    }
    if seed is not None:
        payload["seed"] = int(seed)
    payload["descriptor"] = {
        name: matrix_to_json(getattr(descriptor, name)) for name in "EABCD"
    }
    if ph is not None:
        payload["ph"] = {name: matrix_to_json(getattr(ph, name)) for name in "EJRGPSN"}
    return payload


def system_from_json(obj) -> tuple[DescriptorSystem, PHSystem | None, dict[str, Any]]:
    _check_version(obj)
    try:
        desc = obj["descriptor"]
        sys = DescriptorSystem(
            E=matrix_from_json(desc["E"]),
            A=matrix_from_json(desc["A"]),
            B=matrix_from_json(desc["B"]),
            C=matrix_from_json(desc["C"]),
            D=matrix_from_json(desc["D"]),
        )
    except KeyError as exc:
        raise FormatError(f"system payload missing {exc}") from exc
    ph = None
    if "ph" in obj:
        blocks = obj["ph"]
        ph = PHSystem(**{name: matrix_from_json(blocks[name]) for name in "EJRGPSN"})
    meta = {k: obj[k] for k in ("n", "m", "seed") if k in obj}
    return sys, ph, meta


def pencil_to_json(ecal, acal, n: int, m: int, **meta) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "n": int(n),
        "m": int(m),
        "ecal": matrix_to_json(ecal),
        "acal": matrix_to_json(acal),
    }
    payload.update(meta)
    return payload


def dump_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def save_system(path, descriptor, ph=None, seed=None) -> None:
    dump_json(system_to_json(descriptor, ph, seed), path)


def load_system(path) -> tuple[DescriptorSystem, PHSystem | None, dict[str, Any]]:
    return system_from_json(load_json(path))
