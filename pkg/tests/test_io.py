import numpy as np
import pytest

from clustersweep.io import (
    dump_csv,
    dump_json,
    file_sha256,
    inventory_digest,
    load_table_csv,
    load_table_jsonl,
    read_csv,
    read_json,
)


def test_csv_loads_numeric_columns_only(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text(
        "item_id,f0,f1,city\n"
        "a,1.5,2,york\n"
        "b,0.25,-3,leeds\n"
    )
    out = load_table_csv(path)
    assert out["item_ids"] == ["a", "b"]
    assert out["feature_names"] == ["f0", "f1"]
    assert np.allclose(out["features"], [[1.5, 2.0], [0.25, -3.0]])
    assert out["optional_attributes"] == {"city": ["york", "leeds"]}


def test_csv_without_id_column_uses_row_order(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("f0,f1\n1,2\n3,4\n")
    out = load_table_csv(path)
    assert out["item_ids"] == [0, 1]
    with pytest.raises(ValueError):
        load_table_csv(tmp_path / "empty.csv") if (
            (tmp_path / "empty.csv").write_text("f0\n") or True
        ) else None


def test_jsonl_loads_text_and_extras(tmp_path):
    path = tmp_path / "docs.jsonl"
    path.write_text(
        '{"id": "d0", "text": "alpha beta", "truth": 1}\n'
        "\n"
        '{"id": "d1", "text": "gamma", "truth": 2}\n'
    )
    out = load_table_jsonl(path, id_field="id")
    assert out["item_ids"] == ["d0", "d1"]
    assert out["documents"] == ["alpha beta", "gamma"]
    assert out["optional_attributes"]["truth"] == ["1", "2"]

    with pytest.raises(ValueError, match="missing field"):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "x"}\n')
        load_table_jsonl(bad, id_field="id")


def test_json_roundtrip_and_stable_bytes(tmp_path):
    obj = {"b": [1, 2], "a": {"nested": 0.5}}
    p1, p2 = tmp_path / "one.json", tmp_path / "two.json"
    dump_json(obj, p1)
    dump_json({"a": {"nested": 0.5}, "b": [1, 2]}, p2)
    # key order in the source dict must not leak into the bytes
    assert p1.read_bytes() == p2.read_bytes()
    assert read_json(p1) == obj


def test_csv_roundtrip_and_float_fidelity(tmp_path):
    path = tmp_path / "data.csv"
    value = 0.1 + 0.2  # 0.30000000000000004
    dump_csv(["item_id", "x"], [["a", value], ["b", np.float64(1.0) / 3]], path)
    header, rows = read_csv(path)
    assert header == ["item_id", "x"]
    assert float(rows[0][1]) == value
    assert float(rows[1][1]) == 1.0 / 3


def test_file_hash_and_inventory_digest(tmp_path):
    f = tmp_path / "blob.bin"
    f.write_bytes(b"hello")
    assert file_sha256(f) == (
        "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
    )
    inv = {"a.json": "h1", "b.csv": "h2"}
    shuffled = {"b.csv": "h2", "a.json": "h1"}
    assert inventory_digest(inv) == inventory_digest(shuffled)
    assert inventory_digest(inv) != inventory_digest({"a.json": "h1"})
