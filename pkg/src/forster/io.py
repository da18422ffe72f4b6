"""File formats: CSV / JSON point sets, model JSON, report serialization.

CSV: one point per row, d decimal columns, optional final column in {+1,-1}
marking a labeled set; no header. JSON alternative:
{"d": ..., "points": [[...], ...], "labels": [...]?}.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import PreconditionViolated
from .learner import DecisionList, LabeledSet, PartialClassifier
from .linalg import PointSet, Subspace


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_points_csv(path, points: np.ndarray, labels=None) -> None:
    points = np.atleast_2d(points)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i, row in enumerate(points):
            out = [_fmt(v) for v in row]
            if labels is not None:
                out.append(str(int(labels[i])))
            writer.writerow(out)


def read_points_csv(path, labeled: bool | None = None):
    """Returns (points, labels_or_None). With labeled=None, a final integer
    column of +-1 values is auto-detected as labels."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if rec:
                rows.append([float(v) for v in rec])
    if not rows:
        raise PreconditionViolated("empty point file", path=str(path))
    arr = np.asarray(rows, dtype=float)
    if labeled is None:
        last = arr[:, -1]
        labeled = arr.shape[1] > 1 and np.all(np.abs(last) == 1.0) \
            and np.all(last == np.rint(last))
    if labeled:
        return arr[:, :-1], arr[:, -1].astype(int)
    return arr, None


def read_points_json(path):
    with open(path) as fh:
        obj = json.load(fh)
    pts = np.asarray(obj["points"], dtype=float)
    if pts.shape[1] != obj["d"]:
        raise PreconditionViolated("declared d does not match point width")
    labels = np.asarray(obj["labels"], dtype=int) if obj.get("labels") else None
    return pts, labels


def read_points(path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        return read_points_json(path)
    return read_points_csv(path)


def load_point_set(path) -> PointSet:
    pts, _ = read_points(path)
    return PointSet(pts)


def load_labeled_set(path) -> LabeledSet:
    pts, labels = read_points(path)
    if labels is None:
        raise PreconditionViolated("file has no label column", path=str(path))
    return LabeledSet(pts, labels)


def read_matrix_json(path) -> np.ndarray:
    with open(path) as fh:
        obj = json.load(fh)
    return np.asarray(obj["matrix"] if isinstance(obj, dict) else obj, dtype=float)


def dump_report(obj, path=None) -> str:
    """Deterministic JSON text (sorted keys, round-tripping floats)."""
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def model_to_json(f: DecisionList) -> dict:
    return {
        "ambient_d": f.ambient_d,
        "stages": [
            {
                "V_basis": stage.subspace.basis.tolist(),
                "A": stage.matrix.tolist(),
                "v": stage.weight.tolist(),
                "threshold": stage.threshold,
                "tau": stage.tau,
            }
            for stage in f.stages
        ],
    }


def model_from_json(obj) -> DecisionList:
    stages = []
    d = int(obj["ambient_d"])
    for s in obj["stages"]:
        basis = np.asarray(s["V_basis"], dtype=float)
        sub = Subspace(basis, ambient=d) if basis.size else Subspace.zero(d)
        stages.append(PartialClassifier(
            subspace=sub, matrix=np.asarray(s["A"], dtype=float),
            weight=np.asarray(s["v"], dtype=float),
            threshold=float(s["threshold"]), tau=float(s.get("tau", 1e-9))))
    return DecisionList(tuple(stages), d)


def save_model(f: DecisionList, path) -> None:
    dump_report(model_to_json(f), path)


def load_model(path) -> DecisionList:
    with open(path) as fh:
        return model_from_json(json.load(fh))
