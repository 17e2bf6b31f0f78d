"""Result persistence: JSON summaries, columnar draw CSVs and a hashed
manifest. Re-running with the same seed reproduces byte-identical files."""
from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from .exceptions import SmoothShrinkError
from .model import PosteriorResult


class IoError(SmoothShrinkError):
    """A result file could not be written or read back."""


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # full precision; round-trips exactly
    return str(value)


def write_json(obj, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(obj, handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def draws_columns(draws: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Flatten the draws mapping into scalar columns (coefficient vectors
    expand into one column per entry)."""
    columns: dict[str, np.ndarray] = {}
    for name in sorted(draws):
        arr = np.asarray(draws[name])
        if arr.ndim == 1:
            columns[name] = arr
        else:
            for j in range(arr.shape[1]):
                columns[f"{name}.{j}"] = arr[:, j]
    return columns


def write_draws_csv(draws: dict[str, np.ndarray], path: str) -> None:
    columns = draws_columns(draws)
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(names)
            for i in range(n):
                writer.writerow([_format(columns[name][i]) for name in names])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_draws_csv(path: str) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        columns: list[list[float]] = [[] for _ in header]
        for row in reader:
            for i, cell in enumerate(row):
                columns[i].append(float(cell) if cell else np.nan)
    return {name: np.asarray(col) for name, col in zip(header, columns)}


def write_table_csv(rows: list[dict], path: str) -> None:
    """Long-format table writer; the header is the union of row keys."""
    names: list[str] = []
    for row in rows:
        for key in row:
            if key not in names:
                names.append(key)
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(names)
            for row in rows:
                writer.writerow([_format(row.get(name)) for name in names])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_results(
    result: PosteriorResult,
    out_dir: str,
    prefix: str = "",
    extra_tables: dict[str, list[dict]] | None = None,
) -> dict:
    """Persist a fit: summary JSON, per-draw CSV (when there are draws) and a
    manifest listing every emitted artifact with its content hash."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    summary_path = os.path.join(out_dir, f"{prefix}summary.json")
    write_json(result.to_json_dict(), summary_path)
    written.append(summary_path)

    if result.draws and result.n_draws > 0:
        draws_path = os.path.join(out_dir, f"{prefix}draws.csv")
        write_draws_csv(result.draws, draws_path)
        written.append(draws_path)

    for name, rows in (extra_tables or {}).items():
        table_path = os.path.join(out_dir, f"{prefix}{name}.csv")
        write_table_csv(rows, table_path)
        written.append(table_path)

    manifest = {
        "files": [
            {"name": os.path.basename(p), "sha256": sha256_file(p)} for p in written
        ]
    }
    write_json(manifest, os.path.join(out_dir, f"{prefix}manifest.json"))
    return manifest
