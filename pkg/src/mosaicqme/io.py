"""CSV/JSON persistence and the per-run manifest."""

from __future__ import annotations

import csv
import json
import platform
import time
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy

from . import __version__

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA_VERSION = 1


def fmt(x) -> str:
    """Fixed 12-significant-digit scientific formatting for numeric fields."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.11e}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class RunWriter:
    """Single writer for one run directory.

    Every file goes through :meth:`csv` or :meth:`json` so the inventory is
    complete; :meth:`finish` writes the manifest last.
    """

    def __init__(self, directory: Path, command: str, config_echo: dict):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        stale = self.dir / MANIFEST_NAME
        if stale.exists():
            stale.unlink()
        self.command = command
        self.config = config_echo
        self.artifacts: dict[str, str] = {}
        self.extra: dict = {}
        self._t0 = time.perf_counter()
        self.timings: dict[str, float] = {}

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = (),
            kind: str = "text/csv") -> Path:
        path = self.dir / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
        self.artifacts[name] = kind
        return path

    def json(self, name: str, payload: dict, kind: str = "application/json") -> Path:
        path = self.dir / name
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.artifacts[name] = kind
        return path

    def text(self, name: str, body: str, kind: str = "text/x-python") -> Path:
        path = self.dir / name
        path.write_text(body, encoding="utf-8")
        self.artifacts[name] = kind
        return path

    def mark(self, label: str):
        self.timings[label] = time.perf_counter() - self._t0

    def finish(self, status: str = "ok") -> Path:
        self.timings["total"] = time.perf_counter() - self._t0
        manifest = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "command": self.command,
            "status": status,
            "config": self.config,
            "artifacts": dict(sorted(self.artifacts.items())),
            "versions": {
                "mosaicqme": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "timings_s": self.timings,
            **self.extra,
        }
        path = self.dir / MANIFEST_NAME
        path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a CSV written by :class:`RunWriter`."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    body = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, body
