"""Run-directory persistence: atomic writes, field files, records CSV.

All structured text is JSON with sorted keys. Reals in CSVs are printed
with 17 significant digits so reruns reproduce files byte-for-byte.
Measured wall times are written to a separate ``timings.csv`` precisely
because they cannot be deterministic.
"""
import hashlib
import json
import os
import tempfile

import numpy as np

from ..records import CSV_FIELDS

FIELD_DTYPE = "<f4"


def fmt_real(v):
    return f"{float(v):.17g}"


def atomic_write_bytes(path, payload):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def config_digest(config):
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()


def write_field(path, field, role, seed, digest):
    """Binary float32 little-endian row-major payload plus a JSON sidecar."""
    arr = np.ascontiguousarray(field, dtype=FIELD_DTYPE)
    atomic_write_bytes(path, arr.tobytes())
    sidecar = {
        "shape": list(arr.shape),
        "dtype": "float32-little-endian",
        "order": "row-major",
        "role": role,
        "seed": seed,
        "config_digest": digest,
    }
    atomic_write_text(path + ".json", dump_json(sidecar))


def read_field(path):
    with open(path + ".json", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    payload = np.fromfile(path, dtype=FIELD_DTYPE)
    expected = int(np.prod(sidecar["shape"]))
    if payload.size != expected:
        raise ValueError(
            f"{path}: payload holds {payload.size} values, sidecar promises {expected}"
        )
    return payload.reshape(sidecar["shape"]).astype(np.float64), sidecar


def records_csv(records):
    lines = [",".join(CSV_FIELDS)]
    for r in records:
        row = []
        for name in CSV_FIELDS:
            v = getattr(r, name)
            row.append(str(v) if isinstance(v, int) else fmt_real(v))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def timings_csv(records):
    lines = ["generation,wall_time"]
    for r in records:
        lines.append(f"{r.generation},{fmt_real(r.wall_time)}")
    return "\n".join(lines) + "\n"


def eval_log_csv(eval_log):
    lines = ["eval_index,score"]
    for idx, score in eval_log:
        lines.append(f"{idx},{fmt_real(score)}")
    return "\n".join(lines) + "\n"
