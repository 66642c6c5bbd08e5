"""Dataset CSV (id,score,label) and JSON readers/writers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, List, Union

from .core import ClassConditionals, JointDistribution, ScoredItem

PathLike = Union[str, Path]
COLUMNS = ("id", "score", "label")
NA = "NA"


class DatasetFormatError(ValueError):
    pass


def format_score(x: float) -> str:
    return format(x, ".17g")


def write_dataset(path: PathLike, items: Iterable[ScoredItem]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for it in items:
            w.writerow([it.id, format_score(it.score), NA if it.label is None else str(it.label)])


def read_dataset(path: PathLike, require_labels: bool = False) -> List[ScoredItem]:
    items: List[ScoredItem] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file, expected header {','.join(COLUMNS)}") from None
        for col in COLUMNS:
            if col not in header:
                raise DatasetFormatError(f"{path}: missing column '{col}'")
        pos = {c: header.index(c) for c in COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            raw_score, raw_label = row[pos["score"]].strip(), row[pos["label"]].strip()
            try:
                score = float(raw_score)
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: score {raw_score!r} is not a number") from None
            if not (math.isfinite(score) and 0.0 <= score <= 1.0):
                raise DatasetFormatError(f"{path}:{lineno}: score {raw_score} outside [0, 1]")
            if raw_label in (NA, ""):
                label = None
            elif raw_label in ("0", "1"):
                label = int(raw_label)
            else:
                raise DatasetFormatError(f"{path}:{lineno}: label {raw_label!r} is not 1, 0 or NA")
            if require_labels and label is None:
                raise DatasetFormatError(f"{path}:{lineno}: item has no label")
            items.append(ScoredItem(row[pos["id"]], score, label))
    return items


def write_json(path: PathLike, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def read_json(path: PathLike):
    with open(path) as fh:
        return json.load(fh)


def dump_joint(joint: JointDistribution, path: PathLike, **extra) -> None:
    write_json(path, {**joint.to_dict(), **extra})


def load_joint(path: PathLike) -> JointDistribution:
    return JointDistribution.from_dict(read_json(path))


def dump_conditionals(cc: ClassConditionals, path: PathLike) -> None:
    write_json(path, cc.to_dict())


def load_conditionals(path: PathLike) -> ClassConditionals:
    return ClassConditionals.from_dict(read_json(path))
