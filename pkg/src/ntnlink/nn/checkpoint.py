"""Model checkpoint container: raw little-endian blob plus a JSON manifest.

`<prefix>.bin` holds every tensor back to back as row-major little-endian
float64; `<prefix>.json` records the architecture fingerprint, per-tensor
offsets, the rng seed, the training-epoch counter, and free-form metadata.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ntnlink.errors import CheckpointMismatch, ConfigurationError

FORMAT_VERSION = 1


def save_state(prefix, fingerprint, arrays, rng_seed, epoch, meta=None):
    """arrays: ordered list of (name, ndarray). Writes <prefix>.bin/.json atomically."""
    entries = []
    offset = 0
    blob = bytearray()
    for name, arr in arrays:
        a = np.ascontiguousarray(arr, dtype="<f8")
        raw = a.tobytes()
        entries.append({
            "name": name,
            "shape": list(a.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        blob.extend(raw)
        offset += len(raw)
    manifest = {
        "format_version": FORMAT_VERSION,
        "byte_order": "little",
        "dtype": "float64",
        "fingerprint": fingerprint,
        "rng_seed": int(rng_seed),
        "epoch": int(epoch),
        "tensors": entries,
        "meta": meta or {},
    }
    os.makedirs(os.path.dirname(os.path.abspath(prefix)) or ".", exist_ok=True)
    for suffix, payload in ((".bin", bytes(blob)), (".json", None)):
        path = prefix + suffix
        tmp = path + ".tmp"
        if payload is None:
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(manifest, f, indent=1, sort_keys=True)
                f.write("\n")
        else:
            with open(tmp, "wb") as f:
                f.write(payload)
        os.replace(tmp, path)
    return prefix + ".bin", prefix + ".json"


def load_state(prefix):
    """Returns (manifest dict, {tensor name: ndarray})."""
    json_path = prefix + ".json"
    bin_path = prefix + ".bin"
    if not os.path.exists(json_path) or not os.path.exists(bin_path):
        raise ConfigurationError(f"checkpoint {prefix!r} not found (.bin/.json pair required)")
    with open(json_path, encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise CheckpointMismatch(
            f"unsupported checkpoint format version {manifest.get('format_version')}"
        )
    with open(bin_path, "rb") as f:
        blob = f.read()
    arrays = {}
    for entry in manifest["tensors"]:
        start = entry["offset"]
        raw = blob[start:start + entry["nbytes"]]
        arr = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(entry["shape"])
        arrays[entry["name"]] = arr
    return manifest, arrays


def check_fingerprint(expected, found):
    if expected != found:
        raise CheckpointMismatch(
            "checkpoint architecture fingerprint does not match the built model"
        )
