"""Threat-model-as-code toolkit.

Parse declarative TMDL models, generate STRIDE candidates per element,
compute and rank DREAD risk scores, map mitigations, and render reports.
A complete autonomous-vehicle example model ships with the package; see
``corpus_path()``.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from tmdl.catalog import (
    CatalogEntry,
    CoverageRow,
    builtin_catalog,
    coverage_report,
    export_catalog_json,
    suggestions_for,
)
from tmdl.dread import (
    RankedThreat,
    ScoreDiscrepancy,
    band_of,
    category_histogram,
    compute_score,
    rank_threats,
    severity_histogram,
    verify_printed,
)
from tmdl.jsonio import dumps_model, export_json, import_json, loads_model
from tmdl.model import (
    Channel,
    DataFlowSpec,
    DreadVector,
    Element,
    ElementKind,
    Mitigation,
    Score,
    SeverityBand,
    Threat,
    ThreatCategory,
    ThreatModel,
    ThreatStatus,
    Violation,
    validate_model,
)
from tmdl.parser import TmdlParseError, parse_model, serialize_model
from tmdl.report import (
    ModelDiff,
    diff_models,
    render_asset_table,
    render_diff,
    render_dot,
    render_dread_table,
    render_report,
)
from tmdl.stride import (
    DEFAULT_MATRIX,
    ApplicabilityMatrix,
    CandidateThreat,
    applicable_categories,
    generate_candidates,
    parse_matrix,
    validate_assignments,
)

__version__ = "0.1.0"


def corpus_path() -> Path:
    """Filesystem path of the bundled autonomous-vehicle model."""
    return Path(str(resources.files("tmdl") / "data" / "av_threat_model.tmdl"))
