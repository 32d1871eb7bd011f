"""Dictionary checkpoints: a one-line JSON header followed by raw float64.

The header carries the format version, kernel settings, shape, and whatever
run metadata the caller supplies; the dictionary follows as row-major
little-endian 64-bit floats, so the file is trivially parseable anywhere.
"""
from __future__ import annotations

import json

import numpy as np

from .kernels import KernelSpec

FORMAT_NAME = "kfmc-checkpoint"
FORMAT_VERSION = 1


def kernel_to_dict(spec: KernelSpec) -> dict:
    if spec.is_poly:
        return {"kind": spec.kind, "degree": spec.degree, "offset": spec.offset}
    return {"kind": spec.kind, "sigma": spec.sigma}


def kernel_from_dict(d: dict) -> KernelSpec:
    if d["kind"] == "poly":
        return KernelSpec.poly(degree=d["degree"], offset=d["offset"])
    return KernelSpec.rbf(sigma=d["sigma"])


def save_checkpoint(path, D: np.ndarray, spec: KernelSpec,
                    metadata: dict | None = None) -> None:
    D = np.ascontiguousarray(np.asarray(D, dtype="<f8"))
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kernel": kernel_to_dict(spec),
        "m": int(D.shape[0]),
        "r": int(D.shape[1]),
    }
    if metadata:
        header["metadata"] = metadata
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(D.tobytes(order="C"))


def load_checkpoint(path) -> tuple[np.ndarray, KernelSpec, dict]:
    """Return (dictionary, kernel spec, header dict)."""
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}: not a checkpoint file") from exc
        if header.get("format") != FORMAT_NAME:
            raise ValueError(f"{path}: not a checkpoint file")
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version "
                             f"{header.get('version')}")
        m, r = header["m"], header["r"]
        payload = fh.read()
    expected = m * r * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, "
                         f"got {len(payload)}")
    D = np.frombuffer(payload, dtype="<f8").reshape(m, r).astype(float)
    return D, kernel_from_dict(header["kernel"]), header
