import time

import pytest
from fastapi.testclient import TestClient

from clustersweep.service import create_app


@pytest.fixture(scope="module")
def blob_client(blob_run_dir):
    with TestClient(create_app(blob_run_dir)) as client:
        yield client


@pytest.fixture(scope="module")
def topics_client(topics_run_dir):
    with TestClient(create_app(topics_run_dir)) as client:
        yield client


def test_incomplete_run_dir_409(tmp_path):
    client = TestClient(create_app(tmp_path))
    assert client.get("/run").status_code == 409
    assert client.get("/archetypes").status_code == 409


def test_run_summary(blob_client):
    payload = blob_client.get("/run").json()
    assert payload["manifest"]["method"] == "kmeans"
    assert payload["visible"] == ["2", "3", "4", "5", "6", "7", "8"]
    assert payload["directions"]["sse"] == "lower_better"
    assert payload["metrics"]["3"]["silhouette"]["value"] > 0.5


def test_iteration_payload(blob_client):
    out = blob_client.get("/iterations/3")
    assert out.status_code == 200
    body = out.json()
    assert len(body["item_ids"]) == 300
    assert len(body["assignments"]) == 300
    assert len(body["groups"]) == 3
    assert all(g["size"] == 100 for g in body["groups"])
    assert body["groups"][0]["label"] == "3.0"
    assert blob_client.get("/iterations/99").status_code == 404


def test_transitions_conserve_items(blob_client):
    out = blob_client.get("/transitions", params={"from": "2", "to": "3"})
    assert out.status_code == 200
    body = out.json()
    total = sum(sum(row) for row in body["counts"])
    assert total == 300
    assert blob_client.get(
        "/transitions", params={"from": "3", "to": "3"}
    ).status_code == 422
    assert blob_client.get(
        "/transitions", params={"from": "3", "to": "nope"}
    ).status_code == 404


def test_embedding_modes_and_errors(blob_client):
    by_item = blob_client.get("/embedding", params={"method": "mds"}).json()
    rows = by_item["rows"]
    assert {r["iteration"] for r in rows} == {"2", "3", "4", "5", "6", "7", "8"}
    assert all(r["color"].startswith("#") for r in rows)

    by_arch = blob_client.get(
        "/embedding", params={"method": "mds", "mode": "by_archetype"}
    ).json()
    arch_colors = by_arch["archetype_colors"]
    for row in by_arch["rows"]:
        if row["archetype"] == -1:
            assert row["color"] == "#808080"
        else:
            assert row["color"] == arch_colors[str(row["archetype"])]

    assert blob_client.get(
        "/embedding", params={"method": "umap"}
    ).status_code == 404
    assert blob_client.get(
        "/embedding", params={"method": "mds", "mode": "magic"}
    ).status_code == 422


def test_embedding_positions_differ_colors_do_not(blob_client):
    mds = blob_client.get("/embedding", params={"method": "mds"}).json()
    tsne = blob_client.get("/embedding", params={"method": "tsne"}).json()
    mds_xy = [(r["x"], r["y"]) for r in mds["rows"]]
    tsne_xy = [(r["x"], r["y"]) for r in tsne["rows"]]
    assert mds_xy != tsne_xy
    assert [r["color"] for r in mds["rows"]] == [r["color"] for r in tsne["rows"]]


def test_violin_channels(blob_client):
    body = blob_client.get("/violins", params={"channel": "membership"}).json()
    assert body["channel"] == "membership"
    one = body["violins"][0]
    assert len(one["grid"]) == 64
    assert len(one["density"]) == 64
    split = blob_client.get("/violins", params={"channel": "split"}).json()
    assert len(split["violins"]) == 2 * len(body["violins"])
    assert blob_client.get(
        "/violins", params={"channel": "magic"}
    ).status_code == 422


def test_archetype_payload_and_sweep(blob_client):
    body = blob_client.get("/archetypes").json()
    assert body["threshold"] == 3  # 7 iterations // 2
    assert body["default_threshold"] == 3
    assert body["n_archetypes"] >= 3
    assert set(body["archetype_colors"]) == set(body["centroids"])
    assert len(body["labels"]) == len(body["probabilities"])
    curve = blob_client.get("/archetypes/sweep").json()["curve"]
    assert [p["threshold"] for p in curve] == [2, 3, 4, 5, 6]


def test_threshold_swap_fast_and_color_stable(blob_client, blob_run_dir):
    colors_before = (blob_run_dir / "run" / "colors.json").read_bytes()
    curve = blob_client.get("/archetypes/sweep").json()["curve"]
    start = time.perf_counter()
    for point in curve:
        out = blob_client.post(
            "/archetypes/threshold", json={"value": point["threshold"]}
        )
        assert out.status_code == 200
        body = out.json()
        assert body["threshold"] == point["threshold"]
        assert body["n_archetypes"] == point["n_archetypes"]
        # the model swap never rewrites the color layout
        assert (blob_run_dir / "run" / "colors.json").read_bytes() == colors_before
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0

    assert blob_client.get("/archetypes").json()["threshold"] == 6
    assert blob_client.post(
        "/archetypes/threshold", json={"value": 1}
    ).status_code == 422
    assert blob_client.post(
        "/archetypes/threshold", json={"value": 7}
    ).status_code == 422
    assert blob_client.post("/archetypes/threshold", json={}).status_code == 422
    # restore the default for later tests
    blob_client.post("/archetypes/threshold", json={"value": 3})


def test_ignore_noise_toggle(blob_client):
    strict = blob_client.get("/archetypes").json()
    relaxed = blob_client.get(
        "/archetypes", params={"ignore_noise": "true"}
    ).json()
    assert set(strict["complete_iterations"]) <= set(
        relaxed["complete_iterations"]
    )


def test_visibility_filters_violins_and_pairs(blob_client):
    out = blob_client.post("/visibility", json={"keys": ["2", "4", "8"]})
    assert out.status_code == 200
    body = out.json()
    assert body["visible"] == ["2", "4", "8"]
    assert body["pairs"] == [["2", "4"], ["4", "8"]]
    violins = blob_client.get("/violins").json()["violins"]
    assert {v["iteration"] for v in violins} == {"2", "4", "8"}

    assert blob_client.post(
        "/visibility", json={"keys": ["2"]}
    ).status_code == 422
    assert blob_client.post(
        "/visibility", json={"keys": ["2", "nope"]}
    ).status_code == 422
    assert blob_client.post("/visibility", json={}).status_code == 422
    blob_client.post(
        "/visibility", json={"keys": ["2", "3", "4", "5", "6", "7", "8"]}
    )


def test_class_lifecycle(blob_client):
    created = blob_client.post(
        "/class", json={"kind": "full", "iteration": "3"}
    )
    assert created.status_code == 200
    body = created.json()
    assert body["name"] == "color_3"
    assert sum(body["counts"].values()) == 300
    csv_out = blob_client.get(body["csv_url"])
    assert csv_out.status_code == 200
    assert csv_out.headers["content-type"].startswith("text/csv")
    assert len(csv_out.text.splitlines()) == 301

    tr = blob_client.post(
        "/class",
        json={"kind": "transition", "from": "2", "to": "3", "source": 0},
    ).json()
    assert tr["name"] == "transitions_2.0"
    assert "other" in tr["labels"]

    conn = blob_client.post(
        "/class",
        json={"kind": "connector", "from": "2", "to": "3", "a": 0, "b": 1},
    ).json()
    assert set(conn["labels"]) <= {"shared", "left only", "right only", "other"}

    assert blob_client.post("/class", json={"kind": "magic"}).status_code == 422
    assert blob_client.post(
        "/class", json={"kind": "transition", "from": "2", "to": "3", "source": 77}
    ).status_code == 422
    assert blob_client.get("/class/class-99.csv").status_code == 404


def test_classes_survive_restart(blob_run_dir):
    with TestClient(create_app(blob_run_dir)) as fresh:
        listing = fresh.get("/run")
        assert listing.status_code == 200
        # classes written by the earlier client are replayed from disk
        csv_out = fresh.get("/class/class-1.csv")
        assert csv_out.status_code == 200
        assert len(csv_out.text.splitlines()) == 301


def test_wordclouds_on_numeric_run_422(blob_client):
    blob_client.post("/class", json={"kind": "full", "iteration": "2"})
    out = blob_client.get(
        "/wordclouds", params={"class": "class-1", "mode": "frequency"}
    )
    assert out.status_code == 422


def test_wordclouds_all_modes(topics_client):
    created = topics_client.post(
        "/class", json={"kind": "full", "iteration": "4"}
    ).json()
    class_id = created["id"]

    freq = topics_client.get(
        "/wordclouds", params={"class": class_id, "mode": "frequency"}
    ).json()
    assert freq["mode"] == "frequency"
    assert len(freq["clouds"]) == 4
    for cloud in freq["clouds"]:
        assert cloud["entries"]
        assert all(w > 0 for w in cloud["entries"].values())

    topic = topics_client.get(
        "/wordclouds", params={"class": class_id, "mode": "topic_weight"}
    ).json()
    assert len(topic["clouds"]) == 4

    tr = topics_client.post(
        "/class",
        json={"kind": "transition", "from": "4", "to": "8", "source": 0},
    ).json()
    diff = topics_client.get(
        "/wordclouds", params={"class": tr["id"], "mode": "difference"}
    ).json()
    assert diff["clouds"]
    first = diff["clouds"][0]
    assert "lost" in first and "gained" in first

    assert topics_client.get(
        "/wordclouds", params={"class": class_id, "mode": "magic"}
    ).status_code == 422
    assert topics_client.get(
        "/wordclouds", params={"class": "class-77"}
    ).status_code == 404
