"""HTTP service over one persisted sweep directory.

All artifacts are served from disk except the small mutable session
state: current archetype threshold, iteration visibility, and created
class attributes. Mutations happen under a lock; reads are cheap.

The color table is written once at sweep time and never recomputed
here: every threshold in the swept range already has its centroid
colors in colors.json, so POST /archetypes/threshold swaps models
without touching a single color byte.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware

from .archetypes import complete_iterations, default_threshold, detect
from .io import read_json
from .metrics import DIRECTIONS
from .model import NOISE_ID, SweepRun
from .sweep import (
    _archetypes_to_json,
    export_class,
    load_run,
    prepare_text,
    transition_to_json,
)
from .text import class_term_frequencies, topic_weight_cloud, transition_term_delta
from .transitions import (
    ClassAttribute,
    TransitionCache,
    class_connector_detail,
    class_full,
    class_transition,
    group_label,
    overlap,
    visible_pairs,
)

GRAY_HEX = "#808080"
WORDCLOUD_MODES = ("frequency", "topic_weight", "difference")


class RunState:
    """Everything the service holds for the single mounted run."""

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)
        self.lock = threading.Lock()
        self.run: SweepRun | None = None
        self.manifest: dict = {}
        self.colors: dict = {}
        self.embeddings: dict[str, dict] = {}
        self.violin_json: dict[str, dict] = {}
        self.sweep_curve: dict = {}
        self.current_model = None
        self.classes: dict[str, ClassAttribute] = {}
        self.class_specs: dict[str, dict] = {}
        self._class_counter = 0
        self._text = None
        self.load_error: str | None = None
        try:
            self._load()
        except FileNotFoundError as exc:
            self.load_error = str(exc)

    def _load(self) -> None:
        self.run = load_run(self.run_dir)
        self.manifest = read_json(self.run_dir / "manifest.json")
        run_sub = self.run_dir / "run"
        if (run_sub / "colors.json").exists():
            self.colors = read_json(run_sub / "colors.json")
        if (run_sub / "sweep_curve.json").exists():
            self.sweep_curve = read_json(run_sub / "sweep_curve.json")
        for path in run_sub.glob("embedding-*.json"):
            self.embeddings[path.stem.split("-", 1)[1]] = read_json(path)
        for path in run_sub.glob("violins-*.json"):
            self.violin_json[path.stem.split("-", 1)[1]] = read_json(path)
        self.current_model = self.run.archetypes
        self.transitions = TransitionCache(self.run)
        for side in sorted((run_sub / "classes").glob("*.json")):
            raw = read_json(side)
            attr = ClassAttribute(
                name=raw["name"],
                item_ids=[str(i) for i in raw["item_ids"]],
                values=[str(v) for v in raw["values"]],
                palette=raw.get("palette", {}),
            )
            self.classes[side.stem] = attr
            self.class_specs[side.stem] = raw.get("spec", {})
            number = side.stem.rsplit("-", 1)[-1]
            if number.isdigit():
                self._class_counter = max(self._class_counter, int(number))

    def require(self) -> SweepRun:
        if self.run is None:
            raise HTTPException(status_code=409, detail=self.load_error or "run incomplete")
        return self.run

    def text_inputs(self) -> dict:
        run = self.require()
        if run.table.kind != "text":
            raise HTTPException(status_code=422, detail="word clouds need a text run")
        if self._text is None:
            preprocessing = run.config.preprocessing if run.config else {}
            self._text = prepare_text(run.table, preprocessing)
        return self._text

    def iteration_or_404(self, key: str):
        run = self.require()
        try:
            return run.iteration(key)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown iteration {key!r}")

    def threshold_bounds(self) -> tuple[int, int]:
        run = self.require()
        return 2, len(run.iterations) - 1

    def next_class_id(self) -> str:
        self._class_counter += 1
        return f"class-{self._class_counter}"


def _archetype_payload(state: RunState, ignore_noise: bool) -> dict:
    run = state.require()
    if state.current_model is None or run.pooled is None:
        raise HTTPException(status_code=409, detail="run has no archetype model")
    payload = _archetypes_to_json(state.current_model, run.pooled)
    payload["complete_iterations"] = complete_iterations(
        run.pooled, state.current_model, ignore_noise_archetypes=ignore_noise
    )
    colors = state.colors.get("archetype_colors", {}).get(
        str(state.current_model.threshold), {}
    )
    payload["archetype_colors"] = colors
    payload["default_threshold"] = max(2, default_threshold(len(run.iterations)))
    return payload


def create_app(run_dir: str | Path) -> FastAPI:
    state = RunState(Path(run_dir))
    app = FastAPI(title="clustersweep service")
    app.state.runstate = state
    # the browser client is served as a static page from a different origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.get("/run")
    def get_run() -> dict:
        run = state.require()
        metrics = {}
        for it in run.iterations:
            metrics[it.iteration_key] = {
                name: {"value": entry.value, "direction": entry.direction}
                for name, entry in it.iteration_metrics.items()
            }
        return {
            "manifest": state.manifest,
            "metrics": metrics,
            "directions": dict(DIRECTIONS),
            "visible": [k for k in run.keys if run.visible.get(k, True)],
        }

    @app.get("/iterations/{key}")
    def get_iteration(key: str) -> dict:
        it = state.iteration_or_404(key)
        return {
            "iteration_key": it.iteration_key,
            "param_value": it.param_value,
            "item_ids": list(it.item_ids),
            "assignments": [int(g) for g in it.assignments],
            "membership": [float(v) for v in it.membership],
            "outlier": [float(v) for v in it.outlier],
            "groups": [
                {
                    "group_id": g.group_id,
                    "label": g.label,
                    "size": len(g.member_ids),
                    "is_noise": g.is_noise,
                    "metrics": {k: float(v) for k, v in g.per_group_metrics.items()},
                }
                for g in it.groups
            ],
        }

    @app.get("/transitions")
    def get_transitions(
        from_key: str = Query(alias="from"), to_key: str = Query(alias="to")
    ) -> dict:
        state.iteration_or_404(from_key)
        state.iteration_or_404(to_key)
        if from_key == to_key:
            raise HTTPException(status_code=422, detail="from and to must differ")
        matrix = state.transitions.get(from_key, to_key)
        return transition_to_json(matrix)

    @app.get("/embedding")
    def get_embedding(method: str = "mds", mode: str = "by_item") -> dict:
        state.require()
        if method not in state.embeddings:
            raise HTTPException(
                status_code=404, detail=f"no persisted layout for {method!r}"
            )
        if mode not in ("by_item", "by_archetype"):
            raise HTTPException(status_code=422, detail=f"unknown mode {mode!r}")
        payload = dict(state.embeddings[method])
        payload["color_mode"] = mode
        model = state.current_model
        rows = [dict(r) for r in payload["rows"]]
        if model is not None:
            colors = state.colors.get("archetype_colors", {}).get(
                str(model.threshold), {}
            )
            payload["archetype_colors"] = colors
            for row, label in zip(rows, model.archetype_labels):
                row["archetype"] = int(label)
                if mode == "by_archetype":
                    row["color"] = colors.get(str(int(label)), GRAY_HEX)
        payload["rows"] = rows
        return payload

    @app.get("/violins")
    def get_violins(channel: str = "membership") -> dict:
        run = state.require()
        if channel not in ("membership", "outlier", "split"):
            raise HTTPException(status_code=422, detail=f"unknown channel {channel!r}")
        wanted = ("membership", "outlier") if channel == "split" else (channel,)
        visible = {k for k in run.keys if run.visible.get(k, True)}
        out = []
        for name in wanted:
            if name not in state.violin_json:
                raise HTTPException(status_code=409, detail="violins not persisted")
            out.extend(
                v for v in state.violin_json[name]["violins"] if v["iteration"] in visible
            )
        return {"channel": channel, "violins": out}

    @app.get("/archetypes")
    def get_archetypes(ignore_noise: bool = False) -> dict:
        return _archetype_payload(state, ignore_noise)

    @app.get("/archetypes/sweep")
    def get_archetype_sweep() -> dict:
        state.require()
        if not state.sweep_curve:
            raise HTTPException(status_code=409, detail="sweep curve not persisted")
        return state.sweep_curve

    @app.post("/archetypes/threshold")
    def post_threshold(body: dict = Body(...)) -> dict:
        run = state.require()
        if "value" not in body:
            raise HTTPException(status_code=422, detail="body needs {'value': int}")
        try:
            value = int(body["value"])
        except (TypeError, ValueError):
            raise HTTPException(status_code=422, detail="threshold must be an integer")
        low, high = state.threshold_bounds()
        if not low <= value <= high:
            raise HTTPException(
                status_code=422,
                detail=f"threshold {value} outside [{low}, {high}]",
            )
        with state.lock:
            state.current_model = detect(run.pooled, value)
        return _archetype_payload(state, bool(body.get("ignore_noise", False)))

    @app.post("/visibility")
    def post_visibility(body: dict = Body(...)) -> dict:
        run = state.require()
        keys = body.get("keys")
        if not isinstance(keys, list):
            raise HTTPException(status_code=422, detail="body needs {'keys': [...]}")
        unknown = [k for k in keys if k not in run.keys]
        if unknown:
            raise HTTPException(status_code=422, detail=f"unknown keys {unknown}")
        if len(keys) < 2:
            raise HTTPException(status_code=422, detail="need at least 2 visible iterations")
        with state.lock:
            for k in run.keys:
                run.visible[k] = k in keys
            pairs = visible_pairs(run)
        return {
            "visible": [k for k in run.keys if run.visible[k]],
            "pairs": [list(p) for p in pairs],
        }

    @app.post("/class")
    def post_class(spec: dict = Body(...)) -> dict:
        run = state.require()
        kind = spec.get("kind")
        if kind == "full":
            it = state.iteration_or_404(str(spec.get("iteration")))
            attr = class_full(it)
        elif kind == "transition":
            it_a = state.iteration_or_404(str(spec.get("from")))
            it_b = state.iteration_or_404(str(spec.get("to")))
            group = _group_or_422(it_a, spec.get("source"))
            attr = class_transition(it_a, group, it_b)
        elif kind == "connector":
            it_a = state.iteration_or_404(str(spec.get("from")))
            it_b = state.iteration_or_404(str(spec.get("to")))
            group_a = _group_or_422(it_a, spec.get("a"))
            group_b = _group_or_422(it_b, spec.get("b"))
            attr = class_connector_detail(it_a, group_a, it_b, group_b)
        else:
            raise HTTPException(
                status_code=422,
                detail="kind must be one of full, transition, connector",
            )
        with state.lock:
            class_id = state.next_class_id()
            state.classes[class_id] = attr
            state.class_specs[class_id] = spec
            base = state.run_dir / "run" / "classes"
            base.mkdir(parents=True, exist_ok=True)
            (base / f"{class_id}.csv").write_text(
                export_class(run, attr), encoding="utf-8"
            )
            from .io import dump_json

            dump_json(
                {
                    "name": attr.name,
                    "spec": spec,
                    "item_ids": attr.item_ids,
                    "values": attr.values,
                    "palette": attr.palette,
                },
                base / f"{class_id}.json",
            )
        return {
            "id": class_id,
            "name": attr.name,
            "labels": sorted(set(attr.values)),
            "counts": attr.counts(),
            "csv_url": f"/class/{class_id}.csv",
        }

    @app.get("/class/{class_id}.csv")
    def get_class_csv(class_id: str) -> Response:
        state.require()
        path = state.run_dir / "run" / "classes" / f"{class_id}.csv"
        if class_id not in state.classes or not path.exists():
            raise HTTPException(status_code=404, detail=f"unknown class {class_id!r}")
        return Response(content=path.read_text(encoding="utf-8"), media_type="text/csv")

    @app.get("/wordclouds")
    def get_wordclouds(
        class_id: str = Query(alias="class"), mode: str = "frequency"
    ) -> dict:
        run = state.require()
        if mode not in WORDCLOUD_MODES:
            raise HTTPException(status_code=422, detail=f"unknown mode {mode!r}")
        if class_id not in state.classes:
            raise HTTPException(status_code=404, detail=f"unknown class {class_id!r}")
        text = state.text_inputs()
        attr = state.classes[class_id]

        if mode == "frequency":
            value_of = dict(zip(attr.item_ids, attr.values))
            ordered = [value_of[i] for i in run.table.item_ids]
            clouds = class_term_frequencies(text["docs"], ordered)
            return {
                "mode": mode,
                "clouds": [_cloud_json(clouds[label]) for label in sorted(clouds)],
            }

        if mode == "topic_weight":
            clouds = []
            for label in sorted(set(attr.values)):
                located = _locate_group(run, label)
                if located is None:
                    continue
                clouds.append(
                    _cloud_json(
                        topic_weight_cloud(
                            located.representative, text["dictionary"], label=label
                        )
                    )
                )
            if not clouds:
                raise HTTPException(
                    status_code=422, detail="class has no topic-addressable labels"
                )
            return {"mode": mode, "clouds": clouds}

        # difference: per label "a.g→b.h", the term-weight delta
        deltas = []
        for label in sorted(set(attr.values)):
            if "→" not in label:
                continue
            left, right = label.split("→", 1)
            g_from = _locate_group(run, left)
            g_to = _locate_group(run, right)
            if g_from is None or g_to is None:
                continue
            entry = transition_term_delta(
                g_from.representative, g_to.representative, text["dictionary"], label=label
            )
            deltas.append(
                {
                    "cloud": _cloud_json(entry["cloud"]),
                    "from": entry["from"],
                    "to": entry["to"],
                    "lost": entry["lost"],
                    "gained": entry["gained"],
                }
            )
        if not deltas:
            raise HTTPException(
                status_code=422, detail="class has no transition labels"
            )
        return {"mode": mode, "clouds": deltas}

    return app


def _group_or_422(iteration, group_id):
    try:
        return iteration.group_by_id(int(group_id))
    except (KeyError, TypeError, ValueError):
        raise HTTPException(
            status_code=422,
            detail=f"no group {group_id!r} in iteration {iteration.iteration_key!r}",
        )


def _locate_group(run: SweepRun, label: str):
    """Resolve `<key>.<gid>` (or `<key>.noise`) back to its GroupRecord."""
    if "." not in label:
        return None
    key, _, suffix = label.rpartition(".")
    gid = NOISE_ID if suffix == "noise" else None
    if gid is None:
        try:
            gid = int(suffix)
        except ValueError:
            return None
    try:
        return run.iteration(key).group_by_id(gid)
    except KeyError:
        return None


def _cloud_json(cloud) -> dict:
    return {
        "class_label": cloud.class_label,
        "mode": cloud.mode,
        "entries": cloud.entries,
    }
