"""Single-pass (semi-streaming) maximum weight matching with checkable certificates."""

__version__ = "0.1.0"

from .core import EdgeRecord, Matching, RemapTable, StreamStats, TraceEvent, remap_vertex
from .engine import EngineConfig, StreamEngine, default_beta, run_stream
from .certificate import DualCertificate, upper_bound
from .oracle import SmallGraph, StreamSpec, exact_mwm, generate_stream, offline_greedy

__all__ = [
    "DualCertificate",
    "EdgeRecord",
    "EngineConfig",
    "Matching",
    "RemapTable",
    "SmallGraph",
    "StreamEngine",
    "StreamSpec",
    "StreamStats",
    "TraceEvent",
    "default_beta",
    "exact_mwm",
    "generate_stream",
    "offline_greedy",
    "remap_vertex",
    "run_stream",
    "upper_bound",
]
