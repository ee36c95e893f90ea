"""STRIDE-per-element analysis.

The applicability matrix says which threat categories make sense against
which entity kinds. The default is the standard per-element table:
external entities can be spoofed or repudiate, processes take all six
categories, stores and flows take the data-centric subset, and trust
boundaries carry no threats of their own. The matrix is data, not code;
an alternative can be loaded from a small config block so the engine
stays unopinionated.

Candidate generation is advisory: it proposes one (entity, category) pair
per matrix cell for analyst review and never inserts threats into a
model, so a hand-curated threat list is not buried under generated noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from tmdl.model import (
    ElementKind,
    STRIDE,
    ThreatCategory,
    ThreatModel,
    Violation,
    entity_display_name,
    entity_kind,
)
from tmdl.parser import _Parser, tokenize

RULE_CATEGORY_NOT_APPLICABLE = "category-not-applicable"


@dataclass(frozen=True)
class ApplicabilityMatrix:
    """Map from entity kind to the ordered set of applicable categories.

    Rows are normalized to the fixed S,T,R,I,D,E order with duplicates
    dropped; kinds not mentioned get an empty row.
    """

    rows: Mapping[ElementKind, tuple[ThreatCategory, ...]]

    def __post_init__(self) -> None:
        normalized = {}
        for kind in ElementKind:
            given = set(self.rows.get(kind, ()))
            normalized[kind] = tuple(c for c in STRIDE if c in given)
        object.__setattr__(self, "rows", MappingProxyType(normalized))

    def __getitem__(self, kind: ElementKind) -> tuple[ThreatCategory, ...]:
        return self.rows[kind]


DEFAULT_MATRIX = ApplicabilityMatrix(
    {
        ElementKind.EXTERNAL_ACTOR: (
            ThreatCategory.SPOOFING,
            ThreatCategory.REPUDIATION,
        ),
        ElementKind.PROCESS: STRIDE,
        ElementKind.DATA_STORE: (
            ThreatCategory.TAMPERING,
            ThreatCategory.REPUDIATION,
            ThreatCategory.INFORMATION_DISCLOSURE,
            ThreatCategory.DENIAL_OF_SERVICE,
        ),
        ElementKind.DATA_FLOW: (
            ThreatCategory.TAMPERING,
            ThreatCategory.INFORMATION_DISCLOSURE,
            ThreatCategory.DENIAL_OF_SERVICE,
        ),
        ElementKind.TRUST_BOUNDARY: (),
    }
)


@dataclass(frozen=True)
class CandidateThreat:
    """A matrix-generated (entity, category) pair proposed for review.

    ``rule`` names the matrix cell that fired, with " (covered)" appended
    when a declared threat already records that pair.
    """

    target: str
    category: ThreatCategory
    rule: str
    template_title: str

    @property
    def covered(self) -> bool:
        return self.rule.endswith("(covered)")


def applicable_categories(
    kind: ElementKind, matrix: ApplicabilityMatrix = DEFAULT_MATRIX
) -> tuple[ThreatCategory, ...]:
    """The matrix row for a kind; empty only for trust boundaries by default."""
    return matrix[kind]


def generate_candidates(
    model: ThreatModel, matrix: ApplicabilityMatrix = DEFAULT_MATRIX
) -> list[CandidateThreat]:
    """One candidate per (entity, applicable category) pair.

    Output order is entity declaration order (elements, then flows) and
    category order within each entity, so repeated runs are identical.
    """
    declared = {(t.target, t.category) for t in model.threats}
    out: list[CandidateThreat] = []
    for entity in model.entities():
        kind = entity_kind(entity)
        name = entity_display_name(entity)
        for category in matrix[kind]:
            rule = f"{kind.display} -> {category.value}"
            if (entity.id, category) in declared:
                rule += " (covered)"
            out.append(
                CandidateThreat(
                    target=entity.id,
                    category=category,
                    rule=rule,
                    template_title=f"{category.display} against {name}",
                )
            )
    return out


def validate_assignments(
    model: ThreatModel, matrix: ApplicabilityMatrix = DEFAULT_MATRIX
) -> list[Violation]:
    """One violation per threat whose category is outside its target's row.

    Threats with unresolved targets are skipped here; ``validate_model``
    owns reference resolution.
    """
    out = []
    for t in model.threats:
        kind = model.kind_of(t.target)
        if kind is None:
            continue
        if t.category not in matrix[kind]:
            allowed = ", ".join(c.value for c in matrix[kind]) or "none"
            out.append(
                Violation(
                    str(t.id),
                    RULE_CATEGORY_NOT_APPLICABLE,
                    f"threat {t.id} assigns {t.category.value} to {kind.display} "
                    f"'{t.target}' (applicable: {allowed})",
                )
            )
    return sorted(out, key=Violation.sort_key)


_KIND_BY_DISPLAY = {kind.display: kind for kind in ElementKind}


def parse_matrix(text: str) -> ApplicabilityMatrix:
    """Load a matrix override block.

    Syntax mirrors TMDL::

        matrix {
          Process = [S, T, R, I, D, E]
          DataFlow = [T, I]
        }

    Kind names are ExternalActor, Process, DataStore, DataFlow,
    TrustBoundary; categories may be letters or full names. Kinds that are
    not mentioned keep their default row.
    """
    p = _Parser(tokenize(text))
    p.expect_keyword("matrix")
    p.expect_punct("{")
    rows = dict(DEFAULT_MATRIX.rows)
    seen: set[ElementKind] = set()
    while True:
        tok = p.peek()
        if tok.kind == "punct" and tok.text == "}":
            p.advance()
            break
        kind_tok = p.expect_ident("an element kind name")
        kind = _KIND_BY_DISPLAY.get(kind_tok.text)
        if kind is None:
            p.fail(kind_tok, "one of " + ", ".join(sorted(_KIND_BY_DISPLAY)))
        if kind in seen:
            p.fail(kind_tok, f"at most one row for {kind_tok.text}")
        seen.add(kind)
        p.expect_punct("=")
        p.expect_punct("[")
        cats = [_matrix_category(p)]
        while True:
            nxt = p.peek()
            if nxt.kind == "punct" and nxt.text == ",":
                p.advance()
                cats.append(_matrix_category(p))
                continue
            p.expect_punct("]")
            break
        rows[kind] = tuple(cats)
    eof = p.peek()
    if eof.kind != "eof":
        p.fail(eof, "end of input")
    return ApplicabilityMatrix(rows)


def _matrix_category(p: _Parser) -> ThreatCategory:
    tok = p.expect_ident("a STRIDE category name or letter")
    category = ThreatCategory.from_name(tok.text)
    if category is None:
        p.fail(tok, "a STRIDE category name or letter")
    return category
