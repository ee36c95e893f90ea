"""Core domain types for declarative threat models.

A threat model is a data-flow description of a system -- external actors,
processes, data stores, flows, and trust boundaries -- plus the threats
recorded against those entities and the mitigations that address them.

Everything here is an immutable value: models can be shared freely between
threads, and every operation in the other modules is a pure function over
them. Scoring never touches floating point. A risk score is the mean of
five integer sub-scores in [1, 4], carried as integer tenths (component
sum times two), so equality against one-decimal printed values is exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property, total_ordering
from typing import Iterator, Mapping, Sequence


class ElementKind(enum.Enum):
    """The five kinds of entity a data-flow diagram is built from."""

    EXTERNAL_ACTOR = "actor"
    PROCESS = "process"
    DATA_STORE = "store"
    DATA_FLOW = "flow"
    TRUST_BOUNDARY = "boundary"

    @property
    def display(self) -> str:
        return _KIND_DISPLAY[self]


_KIND_DISPLAY = {
    ElementKind.EXTERNAL_ACTOR: "ExternalActor",
    ElementKind.PROCESS: "Process",
    ElementKind.DATA_STORE: "DataStore",
    ElementKind.DATA_FLOW: "DataFlow",
    ElementKind.TRUST_BOUNDARY: "TrustBoundary",
}


class ThreatCategory(enum.Enum):
    """STRIDE categories, declared in the fixed S,T,R,I,D,E order.

    Histograms, serialized category sets, and applicability rows all keep
    this order.
    """

    SPOOFING = "Spoofing"
    TAMPERING = "Tampering"
    REPUDIATION = "Repudiation"
    INFORMATION_DISCLOSURE = "InformationDisclosure"
    DENIAL_OF_SERVICE = "DenialOfService"
    ELEVATION_OF_PRIVILEGE = "ElevationOfPrivilege"

    @property
    def letter(self) -> str:
        return self.value[0]

    @property
    def display(self) -> str:
        """Human-readable name, e.g. "Denial of Service"."""
        return _CATEGORY_DISPLAY[self]

    @classmethod
    def from_name(cls, name: str) -> ThreatCategory | None:
        """Resolve a category name ("Tampering") or letter ("T")."""
        return _CATEGORY_LOOKUP.get(name)


STRIDE = tuple(ThreatCategory)

_CATEGORY_DISPLAY = {
    ThreatCategory.SPOOFING: "Spoofing",
    ThreatCategory.TAMPERING: "Tampering",
    ThreatCategory.REPUDIATION: "Repudiation",
    ThreatCategory.INFORMATION_DISCLOSURE: "Information Disclosure",
    ThreatCategory.DENIAL_OF_SERVICE: "Denial of Service",
    ThreatCategory.ELEVATION_OF_PRIVILEGE: "Elevation of Privilege",
}

_CATEGORY_LOOKUP: dict[str, ThreatCategory] = {}
for _cat in ThreatCategory:
    _CATEGORY_LOOKUP[_cat.value] = _cat
    _CATEGORY_LOOKUP[_cat.letter] = _cat


class ThreatStatus(enum.Enum):
    OPEN = "open"
    MITIGATED = "mitigated"
    ACCEPTED = "accepted"


class Channel(enum.Enum):
    """Transport of a data flow; wireless and physical flows cross the open air."""

    INTERNAL = "internal"
    WIRELESS = "wireless"
    PHYSICAL = "physical"


class SeverityBand(enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"

    @property
    def rank(self) -> int:
        """Position for monotonicity checks: Low < Medium < High."""
        return ("Low", "Medium", "High").index(self.value)


DREAD_AXES = (
    "damage",
    "reproducibility",
    "exploitability",
    "affected_users",
    "discoverability",
)

#: Fixed vocabulary for mitigation standards tags; anything else must use
#: the "custom:" prefix.
STANDARDS_VOCABULARY = frozenset(
    {"ISO/SAE 21434", "OWASP-Connected-Vehicles", "AUTOSAR"}
)


@dataclass(frozen=True)
class DreadVector:
    """Five integer sub-scores, each in [1, 4].

    Zero is rejected so an omitted component cannot masquerade as a low
    score. The component sum is in [5, 20], so the mean is always an exact
    multiple of 0.2.
    """

    damage: int
    reproducibility: int
    exploitability: int
    affected_users: int
    discoverability: int

    def __post_init__(self) -> None:
        for name, value in zip(DREAD_AXES, self.components()):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if not 1 <= value <= 4:
                raise ValueError(f"{name} must be in [1, 4], got {value}")

    def components(self) -> tuple[int, int, int, int, int]:
        return (
            self.damage,
            self.reproducibility,
            self.exploitability,
            self.affected_users,
            self.discoverability,
        )

    def total(self) -> int:
        return sum(self.components())

    @classmethod
    def from_components(cls, values: Sequence[int]) -> DreadVector:
        if len(values) != 5:
            raise ValueError(f"expected 5 sub-scores, got {len(values)}")
        return cls(*values)


@total_ordering
@dataclass(frozen=True)
class Score:
    """A DREAD mean carried as integer tenths (component sum times two).

    Only ever constructed from a vector's integer sum, never from floats,
    so tenths is an even integer in [10, 40] and one-decimal comparisons
    are exact.
    """

    tenths: int

    def __post_init__(self) -> None:
        if not isinstance(self.tenths, int) or not 10 <= self.tenths <= 40 or self.tenths % 2:
            raise ValueError(
                f"score tenths must be an even integer in [10, 40], got {self.tenths!r}"
            )

    def __lt__(self, other: Score) -> bool:
        if not isinstance(other, Score):
            return NotImplemented
        return self.tenths < other.tenths

    @property
    def display(self) -> str:
        return tenths_to_decimal(self.tenths)


def tenths_to_decimal(tenths: int) -> str:
    """Render integer tenths as a one-decimal string (38 -> "3.8")."""
    return f"{tenths // 10}.{tenths % 10}"


def decimal_to_tenths(text: str) -> int:
    """Parse a non-negative integer or one-decimal string into tenths.

    Raises ValueError for anything with more than one fractional digit;
    a second digit would silently lose precision.
    """
    whole, dot, frac = text.partition(".")
    if not whole.isdigit() or (dot and not (len(frac) == 1 and frac.isdigit())):
        raise ValueError(f"expected a one-decimal value, got {text!r}")
    return int(whole) * 10 + (int(frac) if frac else 0)


@dataclass(frozen=True)
class Element:
    """A node of the modeled system.

    ``zone`` names the containing trust boundary, or "none" for entities
    outside every boundary; boundaries themselves never carry a zone.
    """

    id: str
    name: str
    kind: ElementKind
    zone: str = "none"
    assets: tuple[str, ...] = ()
    notes: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "assets", tuple(self.assets))


@dataclass(frozen=True)
class DataFlowSpec:
    """A directed data flow between two non-boundary, non-flow elements."""

    id: str
    src: str
    dst: str
    data: str = ""
    channel: Channel = Channel.INTERNAL


@dataclass(frozen=True)
class Threat:
    """A categorized, scored risk attached to one entity.

    ``printed_tenths`` preserves the score as it appears in the source
    document (integer tenths, possibly disagreeing with the recomputed
    mean); ``mitigations`` holds ids of declared mitigations, stored sorted
    and deduplicated since the set, not the order, is what matters.
    """

    id: int
    title: str
    target: str
    category: ThreatCategory
    dread: DreadVector
    printed_tenths: int | None = None
    status: ThreatStatus = ThreatStatus.OPEN
    mitigations: tuple[str, ...] = ()
    notes: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 1:
            raise ValueError(f"threat id must be a positive integer, got {self.id!r}")
        if self.printed_tenths is not None and (
            not isinstance(self.printed_tenths, int) or self.printed_tenths < 0
        ):
            raise ValueError("printed tenths must be a non-negative integer")
        object.__setattr__(self, "mitigations", tuple(sorted(set(self.mitigations))))


@dataclass(frozen=True)
class Mitigation:
    """A countermeasure addressing one or more STRIDE categories.

    ``addresses`` is normalized to the fixed S,T,R,I,D,E order and must be
    non-empty; standards tags are validated against the fixed vocabulary by
    ``validate_model``, not here, so out-of-vocabulary data can still be
    loaded and reported on.
    """

    id: str
    description: str
    addresses: tuple[ThreatCategory, ...]
    standards: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        cats = tuple(c for c in STRIDE if c in set(self.addresses))
        if not cats:
            raise ValueError(f"mitigation {self.id!r} must address at least one category")
        object.__setattr__(self, "addresses", cats)
        object.__setattr__(self, "standards", tuple(self.standards))


@dataclass(frozen=True)
class Violation:
    """One broken model invariant: the offending id, the rule, a message."""

    offender: str
    rule: str
    message: str

    def sort_key(self) -> tuple[str, str]:
        return (self.offender, self.rule)


@dataclass(frozen=True, eq=False)
class ThreatModel:
    """The parsed whole: elements, flows, threats, and mitigations.

    Entity tuples preserve declaration order for presentation; equality is
    id-keyed content, so two models differing only in declaration order
    compare equal (canonical serialization is free to reorder). ``spans``
    maps element and threat ids (threat ids as strings) to the (line,
    column) of their declaration and never takes part in equality.
    """

    name: str
    elements: tuple[Element, ...] = ()
    flows: tuple[DataFlowSpec, ...] = ()
    threats: tuple[Threat, ...] = ()
    mitigations: tuple[Mitigation, ...] = ()
    spans: Mapping[str, tuple[int, int]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "flows", tuple(self.flows))
        object.__setattr__(self, "threats", tuple(self.threats))
        object.__setattr__(self, "mitigations", tuple(self.mitigations))
        object.__setattr__(self, "spans", dict(self.spans))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThreatModel):
            return NotImplemented
        for attr in ("elements", "flows", "threats", "mitigations"):
            mine, theirs = getattr(self, attr), getattr(other, attr)
            if len(mine) != len(theirs):
                return False
            if {x.id: x for x in mine} != {x.id: x for x in theirs}:
                return False
        return self.name == other.name

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def entity_map(self) -> dict[str, Element | DataFlowSpec]:
        """All DFD entities (elements and flows) by id; first declaration wins."""
        out: dict[str, Element | DataFlowSpec] = {}
        for el in self.elements:
            out.setdefault(el.id, el)
        for fl in self.flows:
            out.setdefault(fl.id, fl)
        return out

    def entities(self) -> Iterator[Element | DataFlowSpec]:
        """Elements in declaration order, then flows in declaration order."""
        yield from self.elements
        yield from self.flows

    def kind_of(self, entity_id: str) -> ElementKind | None:
        entity = self.entity_map.get(entity_id)
        if entity is None:
            return None
        return entity_kind(entity)

    def display_name(self, entity_id: str) -> str:
        entity = self.entity_map.get(entity_id)
        if isinstance(entity, Element):
            return entity.name
        return entity_id

    def threat_by_id(self, threat_id: int) -> Threat | None:
        for t in self.threats:
            if t.id == threat_id:
                return t
        return None


def entity_kind(entity: Element | DataFlowSpec) -> ElementKind:
    if isinstance(entity, Element):
        return entity.kind
    return ElementKind.DATA_FLOW


def entity_display_name(entity: Element | DataFlowSpec) -> str:
    if isinstance(entity, Element):
        return entity.name
    return entity.id


def canonical_entity_order(
    model: ThreatModel,
) -> tuple[list[Element], list[Element], list[Element], list[DataFlowSpec], list[Element]]:
    """Actors, processes, stores, flows, boundaries, each sorted by id.

    This is the one ordering serializers agree on.
    """
    by_kind: dict[ElementKind, list[Element]] = {k: [] for k in ElementKind}
    for el in model.elements:
        by_kind[el.kind].append(el)
    key = lambda e: e.id
    return (
        sorted(by_kind[ElementKind.EXTERNAL_ACTOR], key=key),
        sorted(by_kind[ElementKind.PROCESS], key=key),
        sorted(by_kind[ElementKind.DATA_STORE], key=key),
        sorted(model.flows, key=key),
        sorted(by_kind[ElementKind.TRUST_BOUNDARY], key=key),
    )


# Rule names used by validate_model; stable so tooling can match on them.
RULE_DUPLICATE_ID = "duplicate-id"
RULE_UNRESOLVED_ZONE = "unresolved-zone"
RULE_BOUNDARY_ZONE = "boundary-zone"
RULE_FLOW_ENDPOINTS = "flow-endpoints"
RULE_UNRESOLVED_TARGET = "unresolved-target"
RULE_UNRESOLVED_MITIGATION = "unresolved-mitigation"
RULE_MITIGATED_EMPTY = "mitigated-without-mitigations"
RULE_STANDARDS_VOCAB = "standards-vocabulary"

_FLOW_ENDPOINT_KINDS = (
    ElementKind.EXTERNAL_ACTOR,
    ElementKind.PROCESS,
    ElementKind.DATA_STORE,
)


def validate_model(model: ThreatModel) -> list[Violation]:
    """Check every structural invariant; violations are data, not failures.

    Returns an empty list iff the model is internally consistent. The
    result is sorted by offending id then rule name, so identical models
    always produce identical reports.
    """
    out: list[Violation] = []

    # One id space for elements, flows, and boundaries.
    seen: dict[str, ElementKind] = {}
    for entity in model.entities():
        kind = entity_kind(entity)
        if entity.id in seen:
            out.append(
                Violation(
                    entity.id,
                    RULE_DUPLICATE_ID,
                    f"id '{entity.id}' declared as both "
                    f"{seen[entity.id].display} and {kind.display}",
                )
            )
        else:
            seen[entity.id] = kind

    boundary_ids = {
        el.id for el in model.elements if el.kind is ElementKind.TRUST_BOUNDARY
    }
    node_kinds = {
        el.id: el.kind for el in model.elements if el.kind is not ElementKind.TRUST_BOUNDARY
    }

    for el in model.elements:
        if el.kind is ElementKind.TRUST_BOUNDARY:
            if el.zone != "none":
                out.append(
                    Violation(
                        el.id,
                        RULE_BOUNDARY_ZONE,
                        f"boundary '{el.id}' carries zone '{el.zone}'; boundaries do not nest",
                    )
                )
        elif el.zone != "none" and el.zone not in boundary_ids:
            out.append(
                Violation(
                    el.id,
                    RULE_UNRESOLVED_ZONE,
                    f"element '{el.id}' names zone '{el.zone}', which is not a declared boundary",
                )
            )

    for fl in model.flows:
        problems = []
        for end, label in ((fl.src, "source"), (fl.dst, "destination")):
            kind = node_kinds.get(end)
            if kind is None:
                problems.append(f"{label} '{end}' is not a declared actor, process, or store")
            elif kind not in _FLOW_ENDPOINT_KINDS:
                problems.append(f"{label} '{end}' is a {kind.display}")
        if fl.src == fl.dst:
            problems.append("source and destination are the same element")
        if problems:
            out.append(Violation(fl.id, RULE_FLOW_ENDPOINTS, "; ".join(problems)))

    seen_threats: set[int] = set()
    mitigation_ids = {m.id for m in model.mitigations}
    for t in model.threats:
        if t.id in seen_threats:
            out.append(
                Violation(str(t.id), RULE_DUPLICATE_ID, f"threat id {t.id} declared twice")
            )
        seen_threats.add(t.id)
        if t.target not in model.entity_map:
            out.append(
                Violation(
                    str(t.id),
                    RULE_UNRESOLVED_TARGET,
                    f"threat {t.id} targets unknown element '{t.target}'",
                )
            )
        for ref in t.mitigations:
            if ref not in mitigation_ids:
                out.append(
                    Violation(
                        str(t.id),
                        RULE_UNRESOLVED_MITIGATION,
                        f"threat {t.id} references undeclared mitigation '{ref}'",
                    )
                )
        if t.status is ThreatStatus.MITIGATED and not t.mitigations:
            out.append(
                Violation(
                    str(t.id),
                    RULE_MITIGATED_EMPTY,
                    f"threat {t.id} is marked mitigated but lists no mitigations",
                )
            )

    seen_mitigations: set[str] = set()
    for m in model.mitigations:
        if m.id in seen_mitigations:
            out.append(
                Violation(m.id, RULE_DUPLICATE_ID, f"mitigation id '{m.id}' declared twice")
            )
        seen_mitigations.add(m.id)
        for tag in m.standards:
            if tag not in STANDARDS_VOCABULARY and not tag.startswith("custom:"):
                out.append(
                    Violation(
                        m.id,
                        RULE_STANDARDS_VOCAB,
                        f"mitigation '{m.id}' uses unknown standards tag '{tag}'",
                    )
                )

    return sorted(out, key=Violation.sort_key)
