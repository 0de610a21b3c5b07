"""Build configuration: every free parameter of the pipeline in one place.

Config files are plain ``key = value`` lines (``#`` comments, blank lines
ignored).  Keys mirror the field names below.  Client endpoints may be
overridden through the environment variables ``LECTUREMAP_DETECTOR_ENDPOINT``
and ``LECTUREMAP_LLM_ENDPOINT``.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemaViolation

DETECTOR_ENDPOINT_ENV = "LECTUREMAP_DETECTOR_ENDPOINT"
LLM_ENDPOINT_ENV = "LECTUREMAP_LLM_ENDPOINT"


@dataclass
class BuildConfig:
    # input paths
    subtitles: str = ""
    frames: str = ""
    annotations: str = ""
    out_dir: str = "build"
    course_id: str = "course"

    # external clients (optional; empty = disabled)
    detector_endpoint: str = ""
    llm_endpoint: str = ""
    client_timeout_s: float = 10.0
    abort_without_detector: bool = False

    # ingest
    sample_interval_ms: int = 1000
    histogram_bins: int = 256
    edge_gradient_threshold: float = 0.1

    # slide segmentation
    emd_threshold: float = 0.15
    edge_change_threshold: float = 0.3

    # element fallback classifier
    block_gap_norm: float = 0.02
    equation_symbol_ratio: float = 0.3
    code_punct_density: float = 0.15

    # concepts
    textrank_window: int = 4
    textrank_damping: float = 0.85
    textrank_tol: float = 1e-6
    textrank_max_iter: int = 200
    top_term_fraction: float = 1 / 3
    max_concepts: int = 15
    mention_gap_ms: int = 5000
    importance_w_duration: float = 1.0
    importance_w_assoc: float = 1.0
    importance_w_incl: float = 1.5
    importance_w_sim: float = 0.5

    # relations
    pmi_window_cues: int = 5
    pmi_threshold: float = 0.5
    similarity_threshold: float = 0.6
    llm_weight: float = 0.6
    llm_retries: int = 2
    llm_chunk_tokens: int = 700
    llm_max_tokens: int = 800

    # course structure
    tot_topics: int = 0  # 0 = derive from segment count, clamped to [2, 10]
    tot_sweeps: int = 500
    tot_alpha: float = 0.0  # 0 = 50 / K
    tot_beta: float = 0.01
    tot_doc_window_cues: int = 5
    curve_stride_ms: int = 1000
    node_quantile: float = 0.7
    node_min_gap_ms: int = 15000

    # layout
    radius_min_norm: float = 0.35
    radius_max_norm: float = 1.0
    follow_ms: int = 60000

    # interaction
    focus_dwell_ms: int = 3000
    hover_grace_ms: int = 500

    seed: int = 12345

    def resolved(self) -> "BuildConfig":
        """Apply environment overrides for client endpoints."""
        cfg = dataclasses.replace(self)
        cfg.detector_endpoint = os.environ.get(
            DETECTOR_ENDPOINT_ENV, cfg.detector_endpoint)
        cfg.llm_endpoint = os.environ.get(LLM_ENDPOINT_ENV, cfg.llm_endpoint)
        return cfg


_RANGES = {
    "emd_threshold": (0.0, None),
    "edge_change_threshold": (0.0, None),
    "textrank_damping": (0.0, 1.0),
    "top_term_fraction": (0.0, 1.0),
    "node_quantile": (0.0, 1.0),
    "llm_weight": (0.0, 1.0),
    "focus_dwell_ms": (0, None),
    "hover_grace_ms": (0, None),
}


def validate_config(cfg: BuildConfig) -> None:
    """Range-check thresholds; raises SchemaViolation with the key path."""
    for key, (lo, hi) in _RANGES.items():
        value = getattr(cfg, key)
        if lo is not None and value < lo:
            raise SchemaViolation(key, f"{value} below minimum {lo}")
        if hi is not None and value > hi:
            raise SchemaViolation(key, f"{value} above maximum {hi}")
    if cfg.textrank_window < 2:
        raise SchemaViolation("textrank_window", "must be >= 2")
    if not 0.0 < cfg.textrank_damping < 1.0:
        raise SchemaViolation("textrank_damping", "must be in (0, 1)")


def _coerce(name: str, raw: str, target_type) -> object:
    raw = raw.strip()
    if target_type is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise SchemaViolation(name, f"not a boolean: {raw!r}")
    try:
        return target_type(raw)
    except ValueError:
        raise SchemaViolation(name, f"not a {target_type.__name__}: {raw!r}")


def parse_config(text: str) -> BuildConfig:
    """Parse a ``key = value`` config document into a BuildConfig."""
    fields = {f.name: f for f in dataclasses.fields(BuildConfig)}
    values: dict[str, object] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise SchemaViolation(f"line {line_no}", f"expected key = value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in fields:
            raise SchemaViolation(key, "unknown config key")
        ftype = fields[key].type
        target = {"str": str, "int": int, "float": float, "bool": bool}[
            ftype if isinstance(ftype, str) else ftype.__name__]
        values[key] = _coerce(key, raw, target)
    cfg = BuildConfig(**values)
    validate_config(cfg)
    return cfg


def load_config(path: str | Path) -> BuildConfig:
    cfg = parse_config(Path(path).read_text(encoding="utf-8"))
    return cfg.resolved()
