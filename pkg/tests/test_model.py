import numpy as np
import pytest

from clustersweep.model import (
    NOISE_ID,
    GroupRecord,
    ItemTable,
    assemble_iteration,
    validate_table,
)


def numeric_table(features, ids=None):
    features = np.asarray(features, dtype=np.float64)
    ids = ids or [f"i{k}" for k in range(len(features))]
    return ItemTable(kind="numeric", item_ids=ids, features=features)


def test_validate_standardizes_and_records():
    raw = numeric_table([[0.0, 5.0], [2.0, 5.0], [4.0, 11.0]])
    with pytest.warns(UserWarning):
        # second column is fine; add a constant third to trigger the warning
        raw3 = numeric_table([[0.0, 5.0, 1.0], [2.0, 5.0, 1.0], [4.0, 11.0, 1.0]])
        table = validate_table(raw3)
    assert table.features.shape == (3, 2)  # constant column dropped
    assert np.allclose(table.features.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(table.features.std(axis=0), 1.0, atol=1e-12)
    assert table.standardization is not None

    clean = validate_table(raw)
    assert clean.features.shape == (3, 2)


def test_validate_rejects_bad_input():
    with pytest.raises(ValueError):
        validate_table(numeric_table([[1.0, np.inf], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        validate_table(numeric_table([[1.0, 2.0]]))
    with pytest.raises(ValueError):
        validate_table(numeric_table([[1.0], [2.0]], ids=["a", "a"]))


def test_validate_text_strip_and_empty():
    table = ItemTable(kind="text", item_ids=["a", "b"],
                      documents=["hello <b>world</b>", "more text here"])
    out = validate_table(table, strip_patterns=(r"<[^>]+>",))
    assert "<b>" not in out.documents[0]
    # a single emptied doc survives; a fully emptied corpus does not
    partial = ItemTable(kind="text", item_ids=["a", "b"],
                        documents=["ok text", "<b></b>"])
    assert validate_table(partial, strip_patterns=(r"<[^>]+>",)).documents[0] == "ok text"
    empty = ItemTable(kind="text", item_ids=["a", "b"],
                      documents=["<i></i>", "<b></b>"])
    with pytest.raises(ValueError):
        validate_table(empty, strip_patterns=(r"<[^>]+>",))


def test_group_record_invariants():
    with pytest.raises(ValueError):
        GroupRecord(group_id=0, iteration_key="k", member_ids=[],
                    representative=np.zeros(2), is_noise=False)
    with pytest.raises(ValueError):
        GroupRecord(group_id=0, iteration_key="k", member_ids=["a"],
                    representative=np.zeros(2), is_noise=True)
    noise = GroupRecord(group_id=NOISE_ID, iteration_key="k", member_ids=["a"],
                        representative=np.zeros(2), is_noise=True)
    assert noise.label == "k.noise"


def group(gid, members, noise=False, key="it"):
    return GroupRecord(group_id=gid, iteration_key=key, member_ids=members,
                       representative=np.zeros(2), is_noise=noise)


def test_assemble_reorders_noise_last_and_checks_partition():
    ids = ["a", "b", "c", "d"]
    it = assemble_iteration(
        iteration_key="it", param_value=1.0, item_ids=ids,
        assignments=np.array([NOISE_ID, 0, 0, 1]),
        membership=np.array([0.0, 0.5, 1.0, 0.25]),
        outlier=np.array([1.0, 0.0, 0.5, 0.75]),
        groups=[
            group(NOISE_ID, ["a"], noise=True),
            group(0, ["b", "c"]),
            group(1, ["d"]),
        ],
    )
    assert [g.group_id for g in it.groups] == [0, 1, NOISE_ID]
    assert it.group_by_id(0).member_ids == ["b", "c"]


def test_assemble_rejects_inconsistencies():
    ids = ["a", "b", "c"]
    base = dict(
        iteration_key="it", param_value=1.0, item_ids=ids,
        membership=np.array([0.5, 0.5, 0.5]),
        outlier=np.array([0.5, 0.5, 0.5]),
    )
    # member list disagrees with assignments
    with pytest.raises(ValueError):
        assemble_iteration(
            assignments=np.array([0, 0, 1]),
            groups=[group(0, ["a"]), group(1, ["c"])], **base,
        )
    # membership out of bounds
    with pytest.raises(ValueError):
        assemble_iteration(
            assignments=np.array([0, 0, 0]),
            groups=[group(0, ["a", "b", "c"])],
            iteration_key="it", param_value=1.0, item_ids=ids,
            membership=np.array([0.5, 1.5, 0.5]),
            outlier=np.array([0.5, 0.5, 0.5]),
        )
    # assignment to a group that does not exist
    with pytest.raises(ValueError):
        assemble_iteration(
            assignments=np.array([0, 0, 2]),
            groups=[group(0, ["a", "b"]), group(1, ["c"])], **base,
        )
    # length mismatch
    with pytest.raises(ValueError):
        assemble_iteration(
            assignments=np.array([0, 0]),
            groups=[group(0, ["a", "b"])],
            iteration_key="it", param_value=1.0, item_ids=ids,
            membership=np.array([0.5, 0.5]),
            outlier=np.array([0.5, 0.5]),
        )
