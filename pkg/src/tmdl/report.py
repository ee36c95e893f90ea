"""Report rendering: score tables, asset inventory, DOT graph, model diffs.

All renderers are pure functions of the model, so identical models yield
byte-identical output. The computed score is the authoritative column
everywhere; printed values that disagree are marked with ``*`` and listed
as footnotes rather than silently replacing the arithmetic truth.

Formats: Markdown tables are CommonMark pipe tables; CSV follows RFC 4180
conventions (comma separator, quote doubling, LF line endings); the graph
output is plain DOT.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from tmdl.catalog import CatalogEntry, coverage_report
from tmdl.dread import (
    category_histogram,
    compute_score,
    rank_threats,
    severity_histogram,
    verify_printed,
)
from tmdl.model import (
    Channel,
    ElementKind,
    Score,
    SeverityBand,
    Threat,
    ThreatModel,
    ThreatStatus,
    tenths_to_decimal,
)

DREAD_HEADER = (
    "ID",
    "Description",
    "Damage",
    "Reproducibility",
    "Exploitability",
    "Affected Users",
    "Discoverability",
    "DREAD score",
)


def _score_cell(threat: Threat) -> str:
    """Computed score, marked with ``*`` when the printed value differs."""
    score = compute_score(threat.dread)
    if threat.printed_tenths is not None and threat.printed_tenths != score.tenths:
        return score.display + "*"
    return score.display


def _dread_rows(model: ThreatModel) -> list[list[str]]:
    rows = []
    for t in sorted(model.threats, key=lambda t: t.id):
        rows.append(
            [str(t.id), t.title, *[str(c) for c in t.dread.components()], _score_cell(t)]
        )
    return rows


def markdown_table(header: tuple[str, ...], rows: list[list[str]]) -> str:
    def cell(text: str) -> str:
        return text.replace("|", "\\|").replace("\n", " ")

    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(cell(c) for c in row) + " |")
    return "\n".join(lines) + "\n"


def csv_table(header: tuple[str, ...], rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_dread_table(model: ThreatModel, format: str = "markdown") -> str:
    """The full scoring table, rows in threat id order.

    ``format`` is "markdown" or "csv". Scores are the computed means; a
    trailing ``*`` marks rows whose printed score disagrees.
    """
    rows = _dread_rows(model)
    if format == "markdown":
        return markdown_table(DREAD_HEADER, rows)
    if format == "csv":
        return csv_table(DREAD_HEADER, rows)
    raise ValueError(f"unknown format {format!r} (expected 'markdown' or 'csv')")


def render_asset_table(model: ThreatModel) -> str:
    """Element inventory grouped by trust zone, as Markdown.

    Flows carry no assets and boundaries are the zones themselves, so the
    table lists actors, processes, and stores. Boundary zones come first
    in declaration order, then everything outside any boundary.
    """
    nodes = [
        el
        for el in model.elements
        if el.kind in (ElementKind.EXTERNAL_ACTOR, ElementKind.PROCESS, ElementKind.DATA_STORE)
    ]
    zones = [el.id for el in model.elements if el.kind is ElementKind.TRUST_BOUNDARY]
    zones.append("none")

    sections = []
    for zone in zones:
        members = [el for el in nodes if el.zone == zone]
        if not members and zone == "none":
            continue
        title = f"Zone: {zone}" if zone != "none" else "Outside any boundary"
        rows = [
            [el.name, el.kind.display, ", ".join(el.assets) or "\u2014", el.notes or "\u2014"]
            for el in members
        ]
        sections.append(
            f"### {title}\n\n" + markdown_table(("Element", "Kind", "System Assets", "Notes"), rows)
        )
    return "\n".join(sections)


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


_DOT_SHAPES = {
    ElementKind.EXTERNAL_ACTOR: "ellipse",
    ElementKind.PROCESS: "box",
    ElementKind.DATA_STORE: "cylinder",
}

_DOT_EDGE_STYLES = {Channel.WIRELESS: "dashed", Channel.PHYSICAL: "dotted"}


def render_dot(model: ThreatModel) -> str:
    """The data-flow diagram as DOT.

    One node per actor/process/store (shape by kind), one edge per flow
    (style by channel), one dashed cluster per trust boundary. Node labels
    are suffixed with the count of open threats on that element; edges get
    the same annotation only when nonzero. Output is deterministic: nodes
    follow declaration order.
    """
    open_counts: dict[str, int] = {}
    for t in model.threats:
        if t.status is ThreatStatus.OPEN:
            open_counts[t.target] = open_counts.get(t.target, 0) + 1

    def node_line(el, indent: str) -> str:
        label = f"{el.name} ({open_counts.get(el.id, 0)} open)"
        return (
            f"{indent}{_dot_quote(el.id)} "
            f"[label={_dot_quote(label)}, shape={_DOT_SHAPES[el.kind]}];"
        )

    boundaries = [el for el in model.elements if el.kind is ElementKind.TRUST_BOUNDARY]
    lines = ["digraph tm {"]
    for el in model.elements:
        if el.kind is ElementKind.TRUST_BOUNDARY or el.zone != "none":
            continue
        lines.append(node_line(el, "  "))
    for boundary in boundaries:
        lines.append(f"  subgraph cluster_{boundary.id} {{")
        lines.append(f"    label={_dot_quote(boundary.id)};")
        lines.append("    style=dashed;")
        for el in model.elements:
            if el.kind is not ElementKind.TRUST_BOUNDARY and el.zone == boundary.id:
                lines.append(node_line(el, "    "))
        lines.append("  }")
    for fl in model.flows:
        attrs = []
        style = _DOT_EDGE_STYLES.get(fl.channel)
        if style:
            attrs.append(f"style={style}")
        open_here = open_counts.get(fl.id, 0)
        if open_here:
            attrs.append(f"label={_dot_quote(f'{open_here} open')}")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_dot_quote(fl.src)} -> {_dot_quote(fl.dst)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ModelDiff:
    """What changed between two models.

    Rescored entries pair each common threat id whose computed score
    changed with its old and new scores; element changes cover the whole
    entity id space (elements, flows, boundaries).
    """

    added_threats: tuple[int, ...]
    removed_threats: tuple[int, ...]
    rescored: tuple[tuple[int, Score, Score], ...]
    added_elements: tuple[str, ...]
    removed_elements: tuple[str, ...]

    @property
    def is_empty(self) -> bool:
        return not (
            self.added_threats
            or self.removed_threats
            or self.rescored
            or self.added_elements
            or self.removed_elements
        )


def diff_models(a: ThreatModel, b: ThreatModel) -> ModelDiff:
    """Compare two models; diff(m, m) is empty and added/removed mirror."""
    a_threats = {t.id: t for t in a.threats}
    b_threats = {t.id: t for t in b.threats}
    rescored = []
    for tid in sorted(a_threats.keys() & b_threats.keys()):
        old = compute_score(a_threats[tid].dread)
        new = compute_score(b_threats[tid].dread)
        if old != new:
            rescored.append((tid, old, new))
    a_entities = set(a.entity_map)
    b_entities = set(b.entity_map)
    return ModelDiff(
        added_threats=tuple(sorted(b_threats.keys() - a_threats.keys())),
        removed_threats=tuple(sorted(a_threats.keys() - b_threats.keys())),
        rescored=tuple(rescored),
        added_elements=tuple(sorted(b_entities - a_entities)),
        removed_elements=tuple(sorted(a_entities - b_entities)),
    )


def render_diff(diff: ModelDiff) -> str:
    """One line per change; empty string for an empty diff."""
    lines = []
    for el_id in diff.added_elements:
        lines.append(f"added element {el_id}")
    for el_id in diff.removed_elements:
        lines.append(f"removed element {el_id}")
    for tid in diff.added_threats:
        lines.append(f"added threat {tid}")
    for tid in diff.removed_threats:
        lines.append(f"removed threat {tid}")
    for tid, old, new in diff.rescored:
        lines.append(f"rescored threat {tid}: {old.display} -> {new.display}")
    return "\n".join(lines) + ("\n" if lines else "")


def render_report(
    model: ThreatModel,
    catalog: tuple[CatalogEntry, ...] | None = None,
    stamp: str | None = None,
) -> str:
    """The full Markdown report.

    Sections in order: model summary, asset table, DREAD table, ranking,
    severity histogram, coverage report, discrepancy footnotes. Output
    contains no timestamps unless ``stamp`` is supplied.
    """
    parts = [f"# Threat Model Report: {model.name}\n"]
    if stamp:
        parts.append(f"Generated: {stamp}\n")

    by_kind = {kind: 0 for kind in ElementKind}
    for el in model.elements:
        by_kind[el.kind] += 1
    by_status = {status: 0 for status in ThreatStatus}
    for t in model.threats:
        by_status[t.status] += 1
    parts.append(
        "## Summary\n\n"
        f"- Elements: {by_kind[ElementKind.EXTERNAL_ACTOR]} actors, "
        f"{by_kind[ElementKind.PROCESS]} processes, "
        f"{by_kind[ElementKind.DATA_STORE]} stores, "
        f"{by_kind[ElementKind.TRUST_BOUNDARY]} boundaries\n"
        f"- Flows: {len(model.flows)}\n"
        f"- Threats: {len(model.threats)} "
        f"({by_status[ThreatStatus.OPEN]} open, "
        f"{by_status[ThreatStatus.MITIGATED]} mitigated, "
        f"{by_status[ThreatStatus.ACCEPTED]} accepted)\n"
        f"- Declared mitigations: {len(model.mitigations)}\n"
    )

    asset_table = render_asset_table(model)
    parts.append("## Assets by Zone\n\n" + (asset_table or "No elements.\n"))

    parts.append("## DREAD Scores\n\n" + render_dread_table(model, "markdown"))

    ranking = rank_threats(model)
    rank_rows = []
    titles = {t.id: t.title for t in model.threats}
    for r in ranking:
        rank_rows.append(
            [str(r.rank), str(r.threat_id), titles[r.threat_id], r.score.display, r.band.value]
        )
    parts.append(
        "## Ranking\n\n"
        + markdown_table(("Rank", "ID", "Title", "Score", "Severity"), rank_rows)
    )

    severity = severity_histogram(model)
    severity_rows = [[band.value, str(severity[band])] for band in SeverityBand]
    categories = category_histogram(model)
    category_rows = [[cat.display, str(count)] for cat, count in categories.items()]
    parts.append(
        "## Severity Histogram\n\n"
        + markdown_table(("Severity", "Threats"), severity_rows)
        + "\n"
        + markdown_table(("Category", "Threats"), category_rows)
    )

    coverage = coverage_report(model, catalog)
    coverage_rows = []
    for row in coverage:
        coverage_rows.append(
            [
                str(row.threat_id),
                row.status.value + (" (uncovered)" if row.uncovered else ""),
                ", ".join(row.declared) or "\u2014",
                ", ".join(row.suggested) or "\u2014",
            ]
        )
    parts.append(
        "## Mitigation Coverage\n\n"
        + markdown_table(("Threat", "Status", "Declared", "Suggested"), coverage_rows)
    )

    discrepancies = verify_printed(model)
    if discrepancies:
        lines = [
            f"- threat {d.threat_id}: printed {tenths_to_decimal(d.printed_tenths)}, "
            f"computed {d.computed.display}"
            for d in discrepancies
        ]
        body = "Printed scores that disagree with the recomputed mean (marked * above):\n\n"
        body += "\n".join(lines) + "\n"
    else:
        body = "All printed scores match the recomputed means.\n"
    parts.append("## Score Discrepancies\n\n" + body)

    return "\n".join(parts)
