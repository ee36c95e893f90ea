"""Strict JSON mirror of the TMDL format.

The document has exactly the top-level keys ``name``, ``elements``,
``flows``, ``threats``, ``mitigations``. DREAD vectors are arrays of five
integers in [damage, reproducibility, exploitability, affected_users,
discoverability] order, and scores travel as one-decimal strings ("3.8")
so no float ever enters the pipeline. Import is strict: unknown keys are
rejected so checked-in fixtures cannot silently rot, and errors carry a
JSON-pointer-style path in ``expected``.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from tmdl.model import (
    Channel,
    DataFlowSpec,
    DreadVector,
    Element,
    ElementKind,
    Mitigation,
    Threat,
    ThreatCategory,
    ThreatModel,
    ThreatStatus,
    canonical_entity_order,
    decimal_to_tenths,
    tenths_to_decimal,
    validate_model,
)
from tmdl.parser import TmdlParseError

_KIND_NAMES = {
    "actor": ElementKind.EXTERNAL_ACTOR,
    "process": ElementKind.PROCESS,
    "store": ElementKind.DATA_STORE,
    "boundary": ElementKind.TRUST_BOUNDARY,
}

_ELEMENT_KEYS = frozenset({"id", "name", "kind", "zone", "assets", "notes"})
_FLOW_KEYS = frozenset({"id", "from", "to", "data", "channel"})
_THREAT_KEYS = frozenset(
    {"id", "title", "target", "category", "dread", "score", "printed", "status", "mitigations", "notes"}
)
_MITIGATION_KEYS = frozenset({"id", "description", "addresses", "standards"})
_TOP_KEYS = ("name", "elements", "flows", "threats", "mitigations")


def export_json(model: ThreatModel) -> dict[str, Any]:
    """Build the JSON document (as plain Python data) for a valid model.

    Lists come out in canonical order; the computed score is included for
    every threat, and the printed score only when the source document had
    one.
    """
    violations = validate_model(model)
    if violations:
        raise ValueError(f"refusing to export an invalid model: {violations[0].message}")

    actors, processes, stores, flows, boundaries = canonical_entity_order(model)
    elements = []
    for el in actors + processes + stores + boundaries:
        elements.append(
            {
                "id": el.id,
                "name": el.name,
                "kind": el.kind.value,
                "zone": el.zone,
                "assets": list(el.assets),
                "notes": el.notes,
            }
        )
    flow_docs = [
        {"id": f.id, "from": f.src, "to": f.dst, "data": f.data, "channel": f.channel.value}
        for f in flows
    ]
    threat_docs = []
    for t in sorted(model.threats, key=lambda t: t.id):
        doc: dict[str, Any] = {
            "id": t.id,
            "title": t.title,
            "target": t.target,
            "category": t.category.value,
            "dread": list(t.dread.components()),
            "score": tenths_to_decimal(2 * t.dread.total()),
            "status": t.status.value,
            "mitigations": list(t.mitigations),
        }
        if t.printed_tenths is not None:
            doc["printed"] = tenths_to_decimal(t.printed_tenths)
        if t.notes:
            doc["notes"] = t.notes
        threat_docs.append(doc)
    mitigation_docs = [
        {
            "id": m.id,
            "description": m.description,
            "addresses": [c.value for c in m.addresses],
            "standards": list(m.standards),
        }
        for m in sorted(model.mitigations, key=lambda m: m.id)
    ]
    return {
        "name": model.name,
        "elements": elements,
        "flows": flow_docs,
        "threats": threat_docs,
        "mitigations": mitigation_docs,
    }


def _err(path: str, found: str) -> TmdlParseError:
    return TmdlParseError(1, 1, path, found)


def _check_keys(obj: Mapping, allowed: frozenset[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise _err(f"{path}/{key}", "unknown key")


def _get(obj: Mapping, key: str, path: str) -> Any:
    if key not in obj:
        raise _err(f"{path}/{key}", "missing key")
    return obj[key]


def _get_str(obj: Mapping, key: str, path: str, default: str | None = None) -> str:
    if key not in obj and default is not None:
        return default
    value = _get(obj, key, path)
    if not isinstance(value, str):
        raise _err(f"{path}/{key}", f"expected a string, got {type(value).__name__}")
    return value


def _get_str_list(obj: Mapping, key: str, path: str, required: bool = False) -> tuple[str, ...]:
    if key not in obj and not required:
        return ()
    value = _get(obj, key, path)
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise _err(f"{path}/{key}", "expected an array of strings")
    return tuple(value)


def import_json(doc: Mapping[str, Any]) -> ThreatModel:
    """Rebuild a model from its JSON mirror; exact inverse of export_json.

    Strict mode: every unknown key, missing required key, malformed value,
    duplicate same-kind id, or score string that disagrees with the DREAD
    components raises TmdlParseError with the offending path.
    """
    if not isinstance(doc, Mapping):
        raise _err("", f"expected an object, got {type(doc).__name__}")
    _check_keys(doc, frozenset(_TOP_KEYS), "")
    for key in _TOP_KEYS:
        _get(doc, key, "")
    name = _get_str(doc, "name", "")

    for key in _TOP_KEYS[1:]:
        if not isinstance(doc[key], list):
            raise _err(f"/{key}", "expected an array")

    elements: list[Element] = []
    seen_by_kind: dict[tuple[str, object], str] = {}

    def check_unique(kind: str, ident: object, path: str) -> None:
        if (kind, ident) in seen_by_kind:
            raise _err(path, f"duplicate {kind} id {ident!r}")
        seen_by_kind[(kind, ident)] = path

    for i, item in enumerate(doc["elements"]):
        path = f"/elements/{i}"
        if not isinstance(item, Mapping):
            raise _err(path, "expected an object")
        _check_keys(item, _ELEMENT_KEYS, path)
        el_id = _get_str(item, "id", path)
        kind_name = _get_str(item, "kind", path)
        if kind_name not in _KIND_NAMES:
            raise _err(f"{path}/kind", f"unknown kind {kind_name!r}")
        check_unique(kind_name, el_id, f"{path}/id")
        elements.append(
            Element(
                id=el_id,
                name=_get_str(item, "name", path),
                kind=_KIND_NAMES[kind_name],
                zone=_get_str(item, "zone", path, default="none"),
                assets=_get_str_list(item, "assets", path),
                notes=_get_str(item, "notes", path, default=""),
            )
        )

    flows: list[DataFlowSpec] = []
    for i, item in enumerate(doc["flows"]):
        path = f"/flows/{i}"
        if not isinstance(item, Mapping):
            raise _err(path, "expected an object")
        _check_keys(item, _FLOW_KEYS, path)
        flow_id = _get_str(item, "id", path)
        check_unique("flow", flow_id, f"{path}/id")
        channel_name = _get_str(item, "channel", path, default=Channel.INTERNAL.value)
        try:
            channel = Channel(channel_name)
        except ValueError:
            raise _err(f"{path}/channel", f"unknown channel {channel_name!r}")
        flows.append(
            DataFlowSpec(
                id=flow_id,
                src=_get_str(item, "from", path),
                dst=_get_str(item, "to", path),
                data=_get_str(item, "data", path, default=""),
                channel=channel,
            )
        )

    threats: list[Threat] = []
    for i, item in enumerate(doc["threats"]):
        path = f"/threats/{i}"
        if not isinstance(item, Mapping):
            raise _err(path, "expected an object")
        _check_keys(item, _THREAT_KEYS, path)
        threat_id = _get(item, "id", path)
        if not isinstance(threat_id, int) or isinstance(threat_id, bool) or threat_id < 1:
            raise _err(f"{path}/id", f"expected a positive integer, got {threat_id!r}")
        check_unique("threat", threat_id, f"{path}/id")
        category = ThreatCategory.from_name(_get_str(item, "category", path))
        if category is None:
            raise _err(f"{path}/category", f"unknown category {item['category']!r}")
        raw = _get(item, "dread", path)
        if not isinstance(raw, list) or len(raw) != 5:
            raise _err(f"{path}/dread", "expected an array of 5 integers")
        try:
            dread = DreadVector.from_components(raw)
        except (TypeError, ValueError) as exc:
            raise _err(f"{path}/dread", str(exc))
        if "score" in item:
            expected = tenths_to_decimal(2 * dread.total())
            if item["score"] != expected:
                raise _err(
                    f"{path}/score",
                    f"score {item['score']!r} disagrees with components (mean {expected})",
                )
        printed = None
        if "printed" in item:
            value = item["printed"]
            if not isinstance(value, str):
                raise _err(f"{path}/printed", "expected a one-decimal string")
            try:
                printed = decimal_to_tenths(value)
            except ValueError:
                raise _err(f"{path}/printed", f"expected a one-decimal string, got {value!r}")
        status_name = _get_str(item, "status", path, default=ThreatStatus.OPEN.value)
        try:
            status = ThreatStatus(status_name)
        except ValueError:
            raise _err(f"{path}/status", f"unknown status {status_name!r}")
        threats.append(
            Threat(
                id=threat_id,
                title=_get_str(item, "title", path),
                target=_get_str(item, "target", path),
                category=category,
                dread=dread,
                printed_tenths=printed,
                status=status,
                mitigations=_get_str_list(item, "mitigations", path),
                notes=_get_str(item, "notes", path, default=""),
            )
        )

    mitigations: list[Mitigation] = []
    for i, item in enumerate(doc["mitigations"]):
        path = f"/mitigations/{i}"
        if not isinstance(item, Mapping):
            raise _err(path, "expected an object")
        _check_keys(item, _MITIGATION_KEYS, path)
        mit_id = _get_str(item, "id", path)
        check_unique("mitigation", mit_id, f"{path}/id")
        names = _get_str_list(item, "addresses", path, required=True)
        cats = []
        for name_ in names:
            cat = ThreatCategory.from_name(name_)
            if cat is None:
                raise _err(f"{path}/addresses", f"unknown category {name_!r}")
            cats.append(cat)
        if not cats:
            raise _err(f"{path}/addresses", "expected at least one category")
        mitigations.append(
            Mitigation(
                id=mit_id,
                description=_get_str(item, "description", path),
                addresses=tuple(cats),
                standards=_get_str_list(item, "standards", path),
            )
        )

    return ThreatModel(
        name=name,
        elements=tuple(elements),
        flows=tuple(flows),
        threats=tuple(threats),
        mitigations=tuple(mitigations),
    )


def dumps_model(model: ThreatModel, *, indent: int | None = 2) -> str:
    """Serialize the JSON mirror to text (UTF-8 friendly, stable key order)."""
    return json.dumps(export_json(model), indent=indent, ensure_ascii=False) + "\n"


def loads_model(text: str) -> ThreatModel:
    """Parse JSON text and import it; JSON syntax errors keep their position."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TmdlParseError(exc.lineno, exc.colno, "valid JSON", exc.msg)
    return import_json(doc)
