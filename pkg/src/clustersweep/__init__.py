"""Parameter-sweep workbench for clustering and topic modeling.

Runs one grouping method across a parameter ladder, attaches stability
and quality evidence to every iteration (transition flows, recurrent
archetypes, membership confidence), and serves the whole run over HTTP
for interactive inspection.
"""

from .model import (
    NOISE_ID,
    GroupRecord,
    ItemTable,
    IterationResult,
    SweepRun,
    assemble_iteration,
    validate_table,
)
from .synth import SyntheticSpec, ari, generate

__all__ = [
    "NOISE_ID",
    "GroupRecord",
    "ItemTable",
    "IterationResult",
    "SweepRun",
    "SyntheticSpec",
    "ari",
    "assemble_iteration",
    "generate",
    "validate_table",
]

__version__ = "0.1.0"
