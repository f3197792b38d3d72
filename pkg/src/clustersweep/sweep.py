"""Sweep execution, artifact persistence, run loading, class export.

One process prepares the shared inputs (validated matrix or TF-IDF)
exactly once; each parameter configuration then runs as an independent
pure task, inline for one worker or across a process pool otherwise.
Results are assembled in parameter order whatever the completion order,
so worker count never changes a byte of output. A failing configuration
is recorded and skipped, not fatal.

On-disk layout under the output directory:

    manifest.json                      (written last; completion marker)
    table.json / features.csv
    iterations/<key>/assignments.csv
    iterations/<key>/uncertainty.csv
    iterations/<key>/groups.json
    iterations/<key>/metrics.json
    run/pooled.csv
    run/archetypes.json
    run/sweep_curve.json
    run/colors.json
    run/embedding-<method>.json
    run/violins-<channel>.json
    run/transitions/<a>__<b>.json
    run/classes/<id>.csv               (created on demand)
"""

from __future__ import annotations

import datetime
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .archetypes import (
    ArchetypeModel,
    PooledMatrix,
    default_threshold,
    pool,
    sweep_curve,
    threshold_sweep,
)
from .config import RunConfig, iteration_key
from .io import (
    dump_csv,
    dump_json,
    file_sha256,
    inventory_digest,
    load_table_csv,
    load_table_jsonl,
    read_csv,
    read_json,
)
from .metrics import MetricEntry, clustering_metrics, per_group_metrics, topic_metrics
from .model import (
    NOISE_ID,
    GroupRecord,
    ItemTable,
    IterationResult,
    SweepRun,
    assemble_iteration,
    validate_table,
)
from .methods import (
    fit_dbscan,
    fit_hdbscan,
    fit_kmeans,
    fit_nmf,
    group_representatives,
    model_assignments,
)
from .projection import (
    ColorLayout,
    EmbeddingLayout,
    build_color_layout,
    build_embedding,
    rgb_to_hex,
    violins,
)
from .synth import SyntheticSpec, generate
from .text import build_dictionary, build_tfidf, inject_bigrams, tokenize
from .transitions import TransitionMatrix, overlap, visible_pairs

EMBED_METHODS = ("mds", "tsne")
VIOLIN_CHANNELS = ("membership", "outlier")


def load_input_table(config: RunConfig) -> ItemTable:
    data = config.data
    if "synthetic" in data:
        spec = SyntheticSpec(**data["synthetic"])
        table, _ = generate(spec)
        return table
    path = Path(data["path"])
    kind = data.get("kind") or ("text" if path.suffix == ".jsonl" else "numeric")
    if kind == "text":
        raw = load_table_jsonl(path, data.get("text_field", "text"), data.get("id_field"))
        return ItemTable(
            kind="text",
            item_ids=[str(i) for i in raw["item_ids"]],
            documents=raw["documents"],
            optional_attributes=raw["optional_attributes"],
        )
    raw = load_table_csv(path, data.get("id_column"))
    return ItemTable(
        kind="numeric",
        item_ids=[str(i) for i in raw["item_ids"]],
        features=raw["features"],
        optional_attributes=raw["optional_attributes"],
    )


def _load_stopwords(path: str | None) -> frozenset[str]:
    if not path:
        return frozenset()
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(t.strip().lower() for t in lines if t.strip())


def prepare_text(table: ItemTable, preprocessing: dict) -> dict:
    """Tokenize once, inject bigrams, apply dictionary caps, build TF-IDF."""
    stopwords = _load_stopwords(preprocessing.get("stopwords"))
    min_df = int(preprocessing.get("min_df", 1))
    docs, _ = tokenize(table.documents, stopwords=stopwords, min_df=min_df)
    docs = inject_bigrams(docs, int(preprocessing.get("n_bigrams", 0)))
    dictionary = build_dictionary(
        docs,
        min_df=min_df,
        max_unigrams=preprocessing.get("max_unigrams"),
        max_bigrams=preprocessing.get("max_bigrams"),
    )
    vocab = set(dictionary.terms)
    docs = [[t for t in tokens if t in vocab] for tokens in docs]
    tfidf = build_tfidf(docs, dictionary)
    return {"docs": docs, "dictionary": dictionary, "tfidf": tfidf}


def run_iteration_task(task: dict) -> dict:
    """One parameter configuration, start to finish. Pure; runs in a
    worker process. Returns everything assemble_iteration needs."""
    from .uncertainty import uncertainty_for  # local: keeps fork payload lean

    method = task["method"]
    params = task["params"]
    key = task["key"]
    item_ids = task["item_ids"]
    X = task.get("X")
    text = task.get("text")
    n = len(item_ids)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if method == "kmeans":
            model = fit_kmeans(X, params["K"], seed=params.get("seed", 0),
                               max_iter=params.get("max_iter", 300),
                               tol=params.get("tol", 1e-6))
        elif method == "dbscan":
            model = fit_dbscan(X, params["eps"], params["min_samples"])
        elif method == "hdbscan":
            model = fit_hdbscan(X, params["min_cluster_size"],
                                params.get("min_samples"))
        elif method == "nmf":
            model = fit_nmf(text["tfidf"], params["K"], seed=params.get("seed", 0),
                            max_iter=params.get("max_iter", 400),
                            tol=params.get("tol", 1e-6))
        else:
            raise ValueError(f"unknown method {method!r}")

        assignments = model_assignments(model)
        records = uncertainty_for(
            method, model, X if method != "nmf" else None
        )
        membership = np.array([r.membership for r in records])
        outlier = np.array([r.outlier for r in records])

        if method == "nmf":
            reps = group_representatives(model, method)
            feature_space = None
            iter_metrics = topic_metrics(
                text["tfidf"], model.W, model.H, text["docs"], text["dictionary"]
            )
        else:
            reps = group_representatives(model, method, X)
            feature_space = X
            iter_metrics = clustering_metrics(
                X, assignments, density=method in ("dbscan", "hdbscan")
            )

        groups = []
        for rep in reps:
            member_idx = np.flatnonzero(assignments == rep.group_id)
            if len(member_idx) == 0:
                # an unused topic carries no items; it cannot form a group
                continue
            topic_context = None
            if method == "nmf":
                topic_context = {
                    "H": model.H,
                    "dictionary": text["dictionary"],
                    "topic": rep.group_id,
                    "docs": text["docs"],
                }
            stats = per_group_metrics(
                member_idx,
                n,
                X=feature_space,
                representative=rep.vector if feature_space is not None else None,
                topic_context=topic_context,
            )
            groups.append(
                GroupRecord(
                    group_id=rep.group_id,
                    iteration_key=key,
                    member_ids=[item_ids[i] for i in member_idx],
                    representative=rep.vector,
                    is_noise=rep.is_noise,
                    per_group_metrics=stats,
                )
            )

    return {
        "key": key,
        "param_value": task["param_value"],
        "assignments": assignments,
        "membership": membership,
        "outlier": outlier,
        "groups": groups,
        "metrics": iter_metrics,
    }


def _metrics_to_json(record: dict) -> dict:
    return {
        name: {"value": entry.value, "direction": entry.direction}
        for name, entry in record.items()
    }


def _metrics_from_json(raw: dict) -> dict:
    return {
        name: MetricEntry(value=entry["value"], direction=entry["direction"])
        for name, entry in raw.items()
    }


def resolve_threshold(config: RunConfig, n_iterations: int,
                      available: dict[int, ArchetypeModel]) -> int | None:
    if not available:
        return None
    if config.archetype_threshold is not None:
        threshold = int(config.archetype_threshold)
        if threshold not in available:
            raise ValueError(
                f"archetype threshold {threshold} outside the swept range "
                f"[2, {n_iterations - 1}]"
            )
        return threshold
    return max(2, default_threshold(n_iterations))


def run_sweep(config: RunConfig, table: ItemTable | None = None) -> SweepRun:
    """Execute a full sweep; persists artifacts when output_dir is set."""
    if table is None:
        table = load_input_table(config)
    table = validate_table(table, tuple(config.preprocessing.get("strip_patterns", ())))

    shared: dict = {"item_ids": table.item_ids}
    if table.kind == "text":
        if config.method != "nmf":
            raise ValueError(f"{config.method} needs a numeric table")
        shared["text"] = prepare_text(table, config.preprocessing)
    else:
        if config.method == "nmf":
            raise ValueError("nmf needs a text table")
        shared["X"] = table.features

    tasks = [
        {
            "method": config.method,
            "params": config.params_for(value),
            "key": iteration_key(config.sweep_param, value),
            "param_value": float(value),
            **shared,
        }
        for value in config.sweep_values
    ]

    workers = config.workers or max(1, (os.cpu_count() or 2) - 1)
    results: list[dict | Exception] = []
    if workers <= 1:
        for task in tasks:
            try:
                results.append(run_iteration_task(task))
            except Exception as exc:  # noqa: BLE001, per-iteration isolation
                results.append(exc)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(run_iteration_task, task) for task in tasks]
            for future in futures:
                try:
                    results.append(future.result())
                except Exception as exc:  # noqa: BLE001
                    results.append(exc)

    iterations: list[IterationResult] = []
    failures: list[tuple[str, str]] = []
    for task, outcome in zip(tasks, results):
        if isinstance(outcome, Exception):
            failures.append((task["key"], f"{type(outcome).__name__}: {outcome}"))
            continue
        iterations.append(
            assemble_iteration(
                iteration_key=outcome["key"],
                param_value=outcome["param_value"],
                item_ids=table.item_ids,
                assignments=outcome["assignments"],
                membership=outcome["membership"],
                outlier=outcome["outlier"],
                groups=outcome["groups"],
                metrics=outcome["metrics"],
            )
        )

    run = SweepRun(
        method=config.method,
        sweep_param=config.sweep_param,
        iterations=iterations,
        visible={it.iteration_key: True for it in iterations},
        config=config,
        table=table,
        failures=failures,
    )
    if not iterations:
        raise RuntimeError(f"every iteration failed: {failures}")

    models_by_threshold: dict[int, ArchetypeModel] = {}
    color_layout = None
    try:
        run.pooled = pool(run)
        models_by_threshold = threshold_sweep(run.pooled)
        threshold = resolve_threshold(config, len(iterations), models_by_threshold)
        if threshold is not None:
            run.archetypes = models_by_threshold[threshold]
        color_layout = build_color_layout(run.pooled, models_by_threshold)
        for method in EMBED_METHODS:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    run.layouts[method] = build_embedding(
                        run.pooled,
                        method,
                        color_layout,
                        run.archetypes,
                        seed=int(config.projection.get("seed", 0)),
                        perplexity=float(config.projection.get("perplexity", 30.0)),
                    )
            except ValueError as exc:
                warnings.warn(f"{method} layout skipped: {exc}")
    except ValueError as exc:
        warnings.warn(f"archetype stage skipped: {exc}")

    if config.output_dir:
        persist_run(run, Path(config.output_dir), models_by_threshold, color_layout)
    return run


def violin_groups(run: SweepRun, channel: str) -> dict[tuple[str, int], np.ndarray]:
    values_of = {
        "membership": lambda it: it.membership,
        "outlier": lambda it: it.outlier,
    }[channel]
    out = {}
    for it in run.iterations:
        index = {item_id: i for i, item_id in enumerate(it.item_ids)}
        per_item = values_of(it)
        for g in it.groups:
            idx = np.array([index[m] for m in g.member_ids])
            out[(it.iteration_key, g.group_id)] = per_item[idx]
    return out


# --- persistence ---------------------------------------------------------


def _group_to_json(g: GroupRecord) -> dict:
    return {
        "group_id": g.group_id,
        "label": g.label,
        "member_ids": list(g.member_ids),
        "representative": [float(v) for v in g.representative],
        "is_noise": g.is_noise,
        "metrics": {k: float(v) for k, v in g.per_group_metrics.items()},
    }


def _layout_to_json(layout: EmbeddingLayout, pooled: PooledMatrix,
                    size_values: np.ndarray | None,
                    archetype_labels: np.ndarray | None) -> dict:
    rows = []
    for i, (key, group_id) in enumerate(pooled.index):
        rows.append(
            {
                "iteration": key,
                "group": group_id,
                "x": float(layout.positions_2d[i, 0]),
                "y": float(layout.positions_2d[i, 1]),
                "x1d": float(layout.positions_1d[i]),
                "color": rgb_to_hex(layout.colors[i]),
                "archetype": int(archetype_labels[i]) if archetype_labels is not None else NOISE_ID,
                "size_value": float(size_values[i]) if size_values is not None else 0.5,
                "is_noise": bool(pooled.is_noise[i]),
            }
        )
    return {
        "method": layout.method,
        "color_mode": layout.color_mode,
        "rows": rows,
        "axis_orders": layout.axis_orders,
        "archetype_colors": {
            str(a): rgb_to_hex(c) for a, c in layout.archetype_colors.items()
        },
    }


def _archetypes_to_json(model: ArchetypeModel, pooled: PooledMatrix) -> dict:
    return {
        "threshold": model.threshold,
        "labels": [
            {"iteration": key, "group": gid, "archetype": int(label)}
            for (key, gid), label in zip(pooled.index, model.archetype_labels)
        ],
        "centroids": {
            str(a): [float(v) for v in c] for a, c in model.archetype_centroids.items()
        },
        "complete_iterations": list(model.complete_iterations),
        "noise_archetype_ids": list(model.noise_archetype_ids),
        "probabilities": [float(p) for p in model.probabilities],
        "n_archetypes": model.n_archetypes,
        "noise_pct": model.noise_pct,
    }


def _colors_to_json(color_layout: ColorLayout) -> dict:
    return {
        "degenerate": color_layout.degenerate,
        "row_uv": [[float(u), float(v)] for u, v in color_layout.row_uv],
        "row_colors": [rgb_to_hex(c) for c in color_layout.row_colors()],
        "centroid_uv": {
            str(t): {str(a): [float(u), float(v)] for a, (u, v) in by_id.items()}
            for t, by_id in color_layout.centroid_uv.items()
        },
        "archetype_colors": {
            str(t): {
                str(a): rgb_to_hex(c)
                for a, c in color_layout.archetype_colors(t).items()
            }
            for t in color_layout.centroid_uv
        },
    }


def _violin_to_json(stats) -> dict:
    return {
        "iteration": stats.iteration_key,
        "group": stats.group_id,
        "channel": stats.channel,
        "grid": [float(v) for v in stats.grid],
        "density": [float(v) for v in stats.density],
        "median": stats.median,
        "q1": stats.q1,
        "q3": stats.q3,
        "width_scale": stats.width_scale,
        "render_as_bar": stats.render_as_bar,
    }


def transition_to_json(matrix: TransitionMatrix) -> dict:
    return {
        "from": matrix.from_key,
        "to": matrix.to_key,
        "from_group_ids": list(matrix.from_group_ids),
        "to_group_ids": list(matrix.to_group_ids),
        "counts": matrix.counts.tolist(),
    }


def persist_run(
    run: SweepRun,
    out: Path,
    models_by_threshold: dict[int, ArchetypeModel],
    color_layout: ColorLayout | None,
) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    table = run.table

    table_json = {
        "kind": table.kind,
        "item_ids": list(table.item_ids),
        "optional_attributes": table.optional_attributes,
        "standardization": table.standardization,
    }
    if table.kind == "text":
        table_json["documents"] = table.documents
    dump_json(table_json, out / "table.json")
    if table.kind == "numeric":
        dump_csv(
            [f"f{j}" for j in range(table.features.shape[1])],
            [list(row) for row in table.features],
            out / "features.csv",
        )

    for it in run.iterations:
        base = out / "iterations" / it.iteration_key
        dump_csv(
            ["item_id", "group"],
            [[i, int(g)] for i, g in zip(it.item_ids, it.assignments)],
            base / "assignments.csv",
        )
        dump_csv(
            ["item_id", "membership", "outlier"],
            [
                [i, float(m), float(o)]
                for i, m, o in zip(it.item_ids, it.membership, it.outlier)
            ],
            base / "uncertainty.csv",
        )
        dump_json(
            {
                "iteration_key": it.iteration_key,
                "param_value": it.param_value,
                "groups": [_group_to_json(g) for g in it.groups],
            },
            base / "groups.json",
        )
        dump_json(_metrics_to_json(it.iteration_metrics), base / "metrics.json")

    if run.pooled is not None:
        pooled = run.pooled
        dim = pooled.rows.shape[1]
        dump_csv(
            ["iteration", "group", "is_noise"] + [f"v{j}" for j in range(dim)],
            [
                [key, gid, int(flag)] + [float(v) for v in row]
                for (key, gid), flag, row in zip(pooled.index, pooled.is_noise, pooled.rows)
            ],
            out / "run" / "pooled.csv",
        )
    if run.archetypes is not None:
        dump_json(_archetypes_to_json(run.archetypes, run.pooled), out / "run" / "archetypes.json")
    if models_by_threshold:
        dump_json(
            {"curve": sweep_curve(models_by_threshold)}, out / "run" / "sweep_curve.json"
        )
    if color_layout is not None:
        dump_json(_colors_to_json(color_layout), out / "run" / "colors.json")

    if run.layouts and run.pooled is not None:
        from .archetypes import size_attribute

        size_values = None
        if run.archetypes is not None:
            size_values = size_attribute(run.pooled, run, "size")
        for method, layout in run.layouts.items():
            dump_json(
                _layout_to_json(
                    layout,
                    run.pooled,
                    size_values,
                    run.archetypes.archetype_labels if run.archetypes is not None else None,
                ),
                out / "run" / f"embedding-{method}.json",
            )

    for channel in VIOLIN_CHANNELS:
        stats = violins(violin_groups(run, channel), channel)
        dump_json(
            {"channel": channel, "violins": [_violin_to_json(s) for s in stats]},
            out / "run" / f"violins-{channel}.json",
        )

    if len(run.iterations) >= 2:
        for a, b in visible_pairs(run):
            matrix = overlap(run.iteration(a), run.iteration(b))
            dump_json(
                transition_to_json(matrix), out / "run" / "transitions" / f"{a}__{b}.json"
            )

    (out / "run" / "classes").mkdir(parents=True, exist_ok=True)

    inventory = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            inventory[path.relative_to(out).as_posix()] = file_sha256(path)
    manifest = {
        "status": "complete",
        "engine_version": __version__,
        "method": run.method,
        "sweep_param": run.sweep_param,
        "n_items": table.n_items,
        "iteration_keys": run.keys,
        "failures": [list(f) for f in run.failures],
        "config": run.config.to_dict() if run.config else None,
        "inventory": inventory,
        "run_digest": inventory_digest(inventory),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    dump_json(manifest, out / "manifest.json")


# --- loading -------------------------------------------------------------


def load_run(run_dir: str | Path) -> SweepRun:
    """Rebuild a SweepRun from persisted artifacts (hashes verified)."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{run_dir}: no manifest (run incomplete?)")
    manifest = read_json(manifest_path)
    for rel, expected in manifest["inventory"].items():
        path = run_dir / rel
        if not path.exists():
            raise ValueError(f"manifest lists missing file {rel}")
        if file_sha256(path) != expected:
            raise ValueError(f"hash mismatch for {rel}")

    table_json = read_json(run_dir / "table.json")
    features = None
    if table_json["kind"] == "numeric":
        header, rows = read_csv(run_dir / "features.csv")
        features = np.array([[float(v) for v in row] for row in rows])
    table = ItemTable(
        kind=table_json["kind"],
        item_ids=[str(i) for i in table_json["item_ids"]],
        features=features,
        documents=table_json.get("documents"),
        optional_attributes=table_json.get("optional_attributes", {}),
        standardization=table_json.get("standardization"),
    )

    config = None
    if manifest.get("config"):
        raw = dict(manifest["config"])
        config = RunConfig(
            method=raw["method"],
            sweep_param=raw["sweep_param"],
            sweep_values=raw["sweep_values"],
            data=raw["data"],
            fixed=raw.get("fixed", {}),
            preprocessing=raw.get("preprocessing", {}),
            projection=raw.get("projection", {}),
            archetype_threshold=raw.get("archetype_threshold"),
        )

    iterations = []
    for key in manifest["iteration_keys"]:
        base = run_dir / "iterations" / key
        _, assign_rows = read_csv(base / "assignments.csv")
        item_ids = [row[0] for row in assign_rows]
        assignments = np.array([int(row[1]) for row in assign_rows])
        _, unc_rows = read_csv(base / "uncertainty.csv")
        membership = np.array([float(row[1]) for row in unc_rows])
        outlier = np.array([float(row[2]) for row in unc_rows])
        groups_json = read_json(base / "groups.json")
        groups = [
            GroupRecord(
                group_id=g["group_id"],
                iteration_key=key,
                member_ids=[str(m) for m in g["member_ids"]],
                representative=np.array(g["representative"]),
                is_noise=g["is_noise"],
                per_group_metrics=g["metrics"],
            )
            for g in groups_json["groups"]
        ]
        iterations.append(
            IterationResult(
                iteration_key=key,
                param_value=groups_json["param_value"],
                item_ids=item_ids,
                assignments=assignments,
                membership=membership,
                outlier=outlier,
                groups=groups,
                iteration_metrics=_metrics_from_json(read_json(base / "metrics.json")),
            )
        )

    run = SweepRun(
        method=manifest["method"],
        sweep_param=manifest["sweep_param"],
        iterations=iterations,
        visible={k: True for k in manifest["iteration_keys"]},
        config=config,
        table=table,
        failures=[tuple(f) for f in manifest.get("failures", [])],
    )

    pooled_path = run_dir / "run" / "pooled.csv"
    if pooled_path.exists():
        header, rows = read_csv(pooled_path)
        index = [(row[0], int(row[1])) for row in rows]
        is_noise = np.array([bool(int(row[2])) for row in rows])
        matrix = np.array([[float(v) for v in row[3:]] for row in rows])
        run.pooled = PooledMatrix(index=index, rows=matrix, is_noise=is_noise)

    arch_path = run_dir / "run" / "archetypes.json"
    if arch_path.exists() and run.pooled is not None:
        raw = read_json(arch_path)
        run.archetypes = ArchetypeModel(
            threshold=raw["threshold"],
            archetype_labels=np.array([entry["archetype"] for entry in raw["labels"]]),
            archetype_centroids={
                int(a): np.array(c) for a, c in raw["centroids"].items()
            },
            complete_iterations=list(raw["complete_iterations"]),
            probabilities=np.array(raw["probabilities"]),
            noise_archetype_ids=[int(a) for a in raw["noise_archetype_ids"]],
        )
    return run


def export_class(run: SweepRun, attribute) -> str:
    """Class CSV joined with the table's optional attribute columns."""
    extra_names = sorted(run.table.optional_attributes) if run.table else []
    index = run.table.index_of() if run.table else {}
    lines = ["item_id," + ",".join([attribute.name] + extra_names)]
    for item_id, value in zip(attribute.item_ids, attribute.values):
        cells = [str(item_id), value]
        for name in extra_names:
            cells.append(str(run.table.optional_attributes[name][index[item_id]]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
