"""Table loading and stable artifact serialization.

All JSON is written with sorted keys and all CSV with `\n` endings so
byte-identical reruns produce byte-identical files; hashing the
inventory is then meaningful.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np


def load_table_csv(path: str | Path, id_column: str | None = None) -> dict:
    """Numeric feature table from CSV; non-numeric columns become
    optional attributes, the id column (default: first column named
    item_id, else row order) supplies item ids."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    columns = list(rows[0].keys())
    if id_column is None and "item_id" in columns:
        id_column = "item_id"

    numeric_cols = []
    for col in columns:
        if col == id_column:
            continue
        try:
            for row in rows:
                float(row[col])
            numeric_cols.append(col)
        except (TypeError, ValueError):
            continue

    item_ids = (
        [row[id_column] for row in rows] if id_column else list(range(len(rows)))
    )
    features = np.array(
        [[float(row[col]) for col in numeric_cols] for row in rows], dtype=np.float64
    )
    attributes = {
        col: [row[col] for row in rows]
        for col in columns
        if col != id_column and col not in numeric_cols
    }
    return {
        "item_ids": item_ids,
        "features": features,
        "feature_names": numeric_cols,
        "optional_attributes": attributes,
    }


def load_table_jsonl(
    path: str | Path, text_field: str = "text", id_field: str | None = None
) -> dict:
    """Text corpus from JSON lines; extra fields become attributes."""
    docs, item_ids, extras = [], [], {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if text_field not in obj:
                raise ValueError(f"{path}:{i + 1}: missing field {text_field!r}")
            # index extras by document position, not file line: blank
            # lines would otherwise shift every later attribute
            doc_idx = len(docs)
            docs.append(str(obj[text_field]))
            item_ids.append(obj[id_field] if id_field else doc_idx)
            for key, value in obj.items():
                if key not in (text_field, id_field):
                    extras.setdefault(key, {})[doc_idx] = value
    if not docs:
        raise ValueError(f"{path}: no documents")
    n = len(docs)
    attributes = {
        key: [str(values.get(i, "")) for i in range(n)] for key, values in extras.items()
    }
    return {"item_ids": item_ids, "documents": docs, "optional_attributes": attributes}


def dump_json(obj, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def dump_csv(header: list[str], rows: list[list], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def _cell(value) -> str:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return str(int(value))
    return str(value)


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def inventory_digest(inventory: dict[str, str]) -> str:
    """Order-independent digest of (path, content hash) pairs; rerunning
    a deterministic config must reproduce it regardless of timestamps."""
    digest = hashlib.sha256()
    for path in sorted(inventory):
        digest.update(f"{path}\x00{inventory[path]}\n".encode())
    return digest.hexdigest()
