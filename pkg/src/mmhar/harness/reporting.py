"""Plain-text persistence of histories, metrics, confusion matrices and summaries."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from mmhar.core import ActionLabel


def write_history_csv(history, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "val_f1"])
        for e in history.epochs:
            w.writerow([e["epoch"], repr(e["train_loss"]), repr(e["val_f1"])])


def write_rows_csv(rows: Iterable[dict], path: str | Path) -> None:
    rows = list(rows)
    if not rows:
        Path(path).write_text("")
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)


def read_rows_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_confusion_csv(cm: np.ndarray, path: str | Path) -> None:
    names = [lab.title for lab in ActionLabel]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["truth\\pred", *names])
        for name, row in zip(names, np.asarray(cm)):
            w.writerow([name, *map(int, row)])


def write_summary(summary: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
