"""Writers for JSON and CSV artifacts and the digest manifest."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

CSV_FLOAT = "%.17g"


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # repr of a float is the shortest string that round-trips exactly
        return v if math.isfinite(v) else None
    return obj


def dumps(obj):
    return json.dumps(_plain(obj), indent=1, allow_nan=False) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows):
    """Rows of floats, written with 17 significant digits (NaN as ``nan``)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.asarray(rows, float):
            w.writerow([CSV_FLOAT % v for v in row])
    return path


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, files, name="manifest.json"):
    """Manifest listing every produced file (relative path, size, sha256)."""
    out_dir = Path(out_dir)
    entries = []
    for f in sorted(Path(f) for f in files):
        entries.append({"file": f.relative_to(out_dir).as_posix(),
                        "bytes": f.stat().st_size, "sha256": sha256(f)})
    return write_json(out_dir / name, {"format": "gsigma.manifest", "version": 1,
                                       "files": entries})


__all__ = ["dumps", "write_json", "read_json", "write_csv", "sha256", "write_manifest"]
