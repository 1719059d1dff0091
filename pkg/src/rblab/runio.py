"""Deterministic CSV/JSON output helpers shared by the library and the CLI."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path


def format_value(v) -> str:
    import numpy as np

    if isinstance(v, (bool, np.bool_)):
        return "true" if bool(v) else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip form: byte-stable per value
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header: list[str], rows: list[list], sidecar: dict | None = None):
    """UTF-8, LF, '.'-decimal CSV with an optional JSON metadata sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    if sidecar is not None:
        side = path.with_suffix(path.suffix + ".meta.json")
        with open(side, "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    return rows[0], rows[1:]


def config_hash(obj: dict) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]
