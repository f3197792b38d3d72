"""Command line entry points.

Every UI action has a scripted twin: `run` executes a sweep from a
YAML config, `serve` mounts a finished run directory over HTTP,
`export-class` replays class propagation, `recompute-archetypes`
replays threshold steering, and `generate` writes synthetic tables.

Compact spec strings (for generate / export-class) look like
`kind:key=value,key=value`, e.g. `blobs:n_items=300,seed=7,n_groups=3`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _parse_scalar(raw: str):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def parse_compact_spec(text: str) -> tuple[str, dict]:
    kind, _, rest = text.partition(":")
    if not kind:
        raise ValueError(f"spec {text!r} needs a kind before ':'")
    params = {}
    for piece in filter(None, rest.split(",")):
        key, sep, value = piece.partition("=")
        if not sep:
            raise ValueError(f"spec piece {piece!r} is not key=value")
        params[key.strip()] = _parse_scalar(value.strip())
    return kind.strip(), params


def cmd_run(args) -> int:
    from .config import RunConfig
    from .sweep import run_sweep

    config = RunConfig.from_yaml(
        args.config, output_dir=args.out, workers=args.workers
    )
    run = run_sweep(config)
    print(f"completed {len(run.iterations)} iterations ({len(run.failures)} failed)")
    for key, message in run.failures:
        print(f"  failed {key}: {message}", file=sys.stderr)
    if config.output_dir:
        print(f"artifacts in {config.output_dir}")
    return 0 if run.iterations else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.run_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_generate(args) -> int:
    from .io import dump_csv
    from .synth import SyntheticSpec, generate

    kind, params = parse_compact_spec(args.spec)
    n_items = int(params.pop("n_items", 300))
    seed = int(params.pop("seed", 0))
    spec = SyntheticSpec(kind=kind, n_items=n_items, seed=seed, structure=params)
    table, truth = generate(spec)
    out = Path(args.out)
    if table.kind == "text":
        with out.open("w", encoding="utf-8") as fh:
            for item_id, doc, t in zip(table.item_ids, table.documents, truth):
                fh.write(
                    json.dumps(
                        {"id": item_id, "text": doc, "truth": int(t)},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    else:
        # truth goes in a sidecar so the loader never mistakes it for a feature
        dim = table.features.shape[1]
        dump_csv(
            ["item_id"] + [f"f{j}" for j in range(dim)],
            [
                [i] + [float(v) for v in row]
                for i, row in zip(table.item_ids, table.features)
            ],
            out,
        )
        dump_csv(
            ["item_id", "truth"],
            [[i, int(t)] for i, t in zip(table.item_ids, truth)],
            out.with_suffix(out.suffix + ".truth.csv"),
        )
    print(f"wrote {table.n_items} items to {out}")
    return 0


def cmd_export_class(args) -> int:
    from .sweep import export_class, load_run
    from .transitions import class_connector_detail, class_full, class_transition

    run = load_run(args.run_dir)
    kind, params = parse_compact_spec(args.spec)
    if kind == "full":
        attr = class_full(run.iteration(str(params["iteration"])))
    elif kind == "transition":
        it_a = run.iteration(str(params["from"]))
        it_b = run.iteration(str(params["to"]))
        attr = class_transition(it_a, it_a.group_by_id(int(params["source"])), it_b)
    elif kind == "connector":
        it_a = run.iteration(str(params["from"]))
        it_b = run.iteration(str(params["to"]))
        attr = class_connector_detail(
            it_a,
            it_a.group_by_id(int(params["a"])),
            it_b,
            it_b.group_by_id(int(params["b"])),
        )
    else:
        raise ValueError(f"unknown class kind {kind!r}")
    text = export_class(run, attr)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_recompute_archetypes(args) -> int:
    from .archetypes import detect
    from .io import dump_json
    from .sweep import _archetypes_to_json, load_run

    run = load_run(args.run_dir)
    if run.pooled is None:
        print("run has no pooled matrix", file=sys.stderr)
        return 1
    low, high = 2, len(run.iterations) - 1
    if not low <= args.threshold <= high:
        print(f"threshold {args.threshold} outside [{low}, {high}]", file=sys.stderr)
        return 1
    model = detect(run.pooled, args.threshold)
    payload = _archetypes_to_json(model, run.pooled)
    out = Path(args.run_dir) / "run" / f"archetypes-threshold-{args.threshold}.json"
    dump_json(payload, out)
    print(
        f"threshold {args.threshold}: {model.n_archetypes} archetypes, "
        f"{model.noise_pct:.1f}% noise, complete: {model.complete_iterations}"
    )
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clustersweep",
        description="Parameter sweeps for grouping methods, with stability evidence",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a sweep from a YAML config")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="serve a finished run directory")
    p.add_argument("run_dir")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("generate", help="write a synthetic table")
    p.add_argument("spec", help="kind:key=value,... e.g. blobs:n_items=300,n_groups=3")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-class", help="build and export a class attribute CSV")
    p.add_argument("run_dir")
    p.add_argument("spec", help="full:iteration=K | transition:from=A,to=B,source=G | connector:from=A,to=B,a=G,b=H")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export_class)

    p = sub.add_parser("recompute-archetypes", help="rerun detection at a threshold")
    p.add_argument("run_dir")
    p.add_argument("--threshold", type=int, required=True)
    p.set_defaults(func=cmd_recompute_archetypes)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
