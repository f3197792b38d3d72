"""Declarative run configuration.

One YAML file describes the whole run: data source, method, the single
swept parameter, fixed parameters, preprocessing, projection, workers.
The CLI and the test rig both funnel through here, so every UI action
stays scriptable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .model import METHODS

SWEEPABLE = {
    "kmeans": ("K", "seed"),
    "nmf": ("K", "seed"),
    "dbscan": ("eps", "min_samples"),
    "hdbscan": ("min_cluster_size", "min_samples"),
}

FIXABLE = {
    "kmeans": ("K", "seed", "max_iter", "tol"),
    "nmf": ("K", "seed", "max_iter", "tol"),
    "dbscan": ("eps", "min_samples"),
    "hdbscan": ("min_cluster_size", "min_samples"),
}

INTEGER_PARAMS = {"K", "seed", "min_samples", "min_cluster_size", "max_iter"}


def iteration_key(param: str, value) -> str:
    """Stable, filesystem-safe key: "seed-3" for seed sweeps, the
    shortest exact decimal otherwise ("0.05", "3", "12")."""
    if param == "seed":
        return f"seed-{int(value)}"
    if isinstance(value, float):
        return format(round(value, 10), "g")
    return str(value)


def expand_range(sweep: dict) -> list:
    if "values" in sweep:
        values = list(sweep["values"])
    else:
        start, stop, step = sweep["start"], sweep["stop"], sweep["step"]
        if step <= 0:
            raise ValueError("sweep step must be positive")
        values = []
        v = start
        while v <= stop + step * 1e-9:
            values.append(round(v, 10))
            v += step
    if not values:
        raise ValueError("sweep range is empty")
    return values


@dataclass
class RunConfig:
    method: str
    sweep_param: str
    sweep_values: list
    data: dict
    fixed: dict = field(default_factory=dict)
    preprocessing: dict = field(default_factory=dict)
    projection: dict = field(default_factory=dict)
    workers: int | None = None
    output_dir: str | None = None
    archetype_threshold: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.sweep_param not in SWEEPABLE[self.method]:
            raise ValueError(
                f"parameter {self.sweep_param!r} is not sweepable for {self.method}"
            )
        for name in self.fixed:
            if name not in FIXABLE[self.method]:
                raise ValueError(f"parameter {name!r} does not apply to {self.method}")
        if self.sweep_param in self.fixed:
            raise ValueError(f"{self.sweep_param!r} is both swept and fixed")
        if not self.sweep_values:
            raise ValueError("sweep range is empty")
        if self.sweep_param in INTEGER_PARAMS:
            self.sweep_values = [int(v) for v in self.sweep_values]
        if len(set(self.sweep_values)) != len(self.sweep_values):
            raise ValueError("sweep values must be distinct")
        if "synthetic" not in self.data and "path" not in self.data:
            raise ValueError("data section needs a path or a synthetic spec")
        self.projection = {"method": "mds", "seed": 0, "perplexity": 30.0, **self.projection}

    @property
    def iteration_keys(self) -> list[str]:
        return [iteration_key(self.sweep_param, v) for v in self.sweep_values]

    def params_for(self, value) -> dict:
        return {**self.fixed, self.sweep_param: value}

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "sweep_param": self.sweep_param,
            "sweep_values": list(self.sweep_values),
            "data": self.data,
            "fixed": dict(self.fixed),
            "preprocessing": dict(self.preprocessing),
            "projection": dict(self.projection),
            "archetype_threshold": self.archetype_threshold,
        }

    @classmethod
    def from_dict(cls, raw: dict, output_dir: str | None = None,
                  workers: int | None = None) -> "RunConfig":
        sweep = raw.get("sweep")
        if not isinstance(sweep, dict) or "param" not in sweep:
            raise ValueError("config needs a sweep section with a param")
        return cls(
            method=raw.get("method", ""),
            sweep_param=sweep["param"],
            sweep_values=expand_range(sweep),
            data=raw.get("data", {}),
            fixed=dict(raw.get("fixed", {})),
            preprocessing=dict(raw.get("preprocessing", {})),
            projection=dict(raw.get("projection", {})),
            workers=workers if workers is not None else raw.get("workers"),
            output_dir=output_dir or raw.get("output_dir"),
            archetype_threshold=raw.get("archetype_threshold"),
        )

    @classmethod
    def from_yaml(cls, path: str | Path, output_dir: str | None = None,
                  workers: int | None = None) -> "RunConfig":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a mapping")
        return cls.from_dict(raw, output_dir=output_dir, workers=workers)
