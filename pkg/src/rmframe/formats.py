"""File formats: frames CSV, OBJ meshes, JSON reports.

Floats are written with 17 significant digits so repeated runs are
byte-identical and values round-trip.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .core import SurfaceMesh
from .errors import InputError
from .transport import RMFrame

FLOAT_FMT = "%.17g"


def fmt(x: float) -> str:
    return FLOAT_FMT % x


def frames_header(dim: int, normals: int) -> list[str]:
    cols = ["t"]
    for name in ["point", "T"] + [f"N{k + 1}" for k in range(normals)]:
        cols += [f"{name}_{i + 1}" for i in range(dim)]
    return cols + [f"kappa{k + 1}" for k in range(normals)]


def frames_to_csv(fr: RMFrame) -> str:
    dim = fr.points.shape[1]
    k = fr.normals.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(frames_header(dim, k))
    for i in range(len(fr.ts)):
        row = [fr.ts[i], *fr.points[i], *fr.tangent[i], *fr.normals[i].ravel(), *fr.kappas[i]]
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """``(ts, N1)`` from a frames CSV (only ``t`` and ``N1_*`` columns are used)."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read field file {path}: {exc}") from exc
    if len(rows) < 2:
        raise InputError("field file has no samples")
    header = rows[0]
    if "t" not in header:
        raise InputError("field file needs a 't' column")
    ncols = [i for i, h in enumerate(header) if h.startswith("N1_")]
    if not ncols:
        raise InputError("field file needs N1_* columns")
    try:
        data = np.array([[float(r[i]) for i in [header.index("t")] + ncols] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise InputError(f"bad number in field file: {exc}") from exc
    return data[:, 0], data[:, 1:]


def mesh_to_obj(mesh: SurfaceMesh, clamp_z: float | None = None) -> str:
    pts = mesh.points.reshape(-1, 3)
    if clamp_z is not None:
        pts = pts.copy()
        pts[:, 2] = np.maximum(pts[:, 2], clamp_z)
    lines = [f"# rows {mesh.shape[0]} cols {mesh.shape[1]}"]
    lines += ["v " + " ".join(fmt(c) for c in p) for p in pts]
    lines += ["f " + " ".join(str(int(i) + 1) for i in q) for q in mesh.quads]
    return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
