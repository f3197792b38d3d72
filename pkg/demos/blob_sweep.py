"""Sweep K on three separated blobs, then condense the runs into archetypes.

Run:  python3 demos/blob_sweep.py
"""

import tempfile
from pathlib import Path

from clustersweep.config import RunConfig
from clustersweep.sweep import load_run, run_sweep
from clustersweep.synth import SyntheticSpec, ari, generate

out = Path(tempfile.mkdtemp(prefix="blob-sweep-"))
cfg = RunConfig(
    method="kmeans",
    sweep_param="K",
    sweep_values=[2, 3, 4, 5, 6, 7, 8],
    data={
        "synthetic": {
            "kind": "blobs",
            "n_items": 300,
            "seed": 7,
            "structure": {"n_groups": 3, "separation": 20.0},
        }
    },
    fixed={"seed": 0},
    output_dir=str(out),
    workers=4,
)
run_sweep(cfg)
run = load_run(out)

print(f"run dir: {out}")
print(f"{len(run.iterations)} iterations, {len(run.failures)} failures")
print()
print("K   silhouette      DB        CH        SSE")
for it in run.iterations:
    m = it.iteration_metrics
    print(
        f"{it.iteration_key:<3} {m['silhouette'].value:9.4f} "
        f"{m['davies_bouldin'].value:9.4f} "
        f"{m['calinski_harabasz'].value:11.1f} "
        f"{m['sse'].value:11.1f}"
    )

best = max(run.iterations, key=lambda it: it.iteration_metrics["silhouette"].value)
print(f"\nsilhouette picks K={best.iteration_key}")

spec = SyntheticSpec(**cfg.data["synthetic"])
_, truth = generate(spec)
print(f"ARI against generating labels at K=3: "
      f"{ari(run.iteration('3').assignments, truth):.3f}")

# condensed view: which group shapes recur across K?
model = run.archetypes
print(f"\narchetypes at default threshold {model.threshold}:")
for aid in sorted(set(int(a) for a in model.archetype_labels) - {-1}):
    n_members = int((model.archetype_labels == aid).sum())
    tag = " (noise)" if aid in model.noise_archetype_ids else ""
    print(f"  archetype {aid}: {n_members} pooled groups{tag}")
complete = sorted(model.complete_iterations, key=float)
print(f"iterations fully covered by archetypes: {complete}")

# every pooled centroid from an unsplit blob recurs bitwise-identically,
# so the condensation over-counts at low thresholds; the curve shows
# where it settles
from clustersweep.archetypes import sweep_curve, threshold_sweep  # noqa: E402

curve = sweep_curve(threshold_sweep(run.pooled))
print("\nthreshold  n_archetypes  noise%")
for point in curve:
    print(f"{point['threshold']:>9}  {point['n_archetypes']:>12}  "
          f"{point['noise_pct']:6.1f}")

print(f"\nartifacts: {sorted(p.name for p in (out / 'run').iterdir())}")
