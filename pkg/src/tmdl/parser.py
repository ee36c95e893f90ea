"""Parser and canonical serializer for the TMDL text format.

TMDL is a small declarative language for threat models. ``#`` starts a
comment that runs to end of line; input is UTF-8. The grammar::

    model      = "model" STRING "{" item* "}" ;
    item       = element | flow | boundary | threat | mitigation ;
    element    = ("actor"|"process"|"store") IDENT block ;
    flow       = "flow" IDENT ":" IDENT "->" IDENT block ;
    boundary   = "boundary" IDENT "{" "contains" "=" idlist "}" ;
    threat     = "threat" INT STRING "on" IDENT block ;
    mitigation = "mitigation" IDENT STRING "for" catlist block ;
    block      = "{" attr* "}" ;
    attr       = IDENT "=" value ;
    value      = STRING | INT | DECIMAL | IDENT | "[" value ("," value)* "]" ;
    idlist     = "[" IDENT ("," IDENT)* "]" ;
    catlist    = CAT ("," CAT)* ;
    IDENT      = [A-Za-z_][A-Za-z0-9_]* ;   CAT = a STRIDE category name ;

Recognized attributes:

* elements: ``name`` (display string, defaults to the id), ``zone``,
  ``assets`` (string list), ``notes``
* flows: ``data``, ``channel`` (internal | wireless | physical)
* threats: ``category`` (required), ``dread`` (required list of five
  integers in [1, 4]), ``printed`` (optional one-decimal value),
  ``status``, ``mitigations`` (id list), ``notes``
* mitigations: ``standards`` (string list)

A boundary's ``contains`` list is the canonical encoding of zone
membership: the parser folds it into each member element's ``zone`` field
and the serializer reconstructs it, so the two spellings cannot drift
apart. Parsing is pure and keeps declaration order; it enforces only what
a later pass could not repair (syntax, per-kind duplicate ids, component
ranges). Cross-reference checks live in ``validate_model``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NoReturn

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


class TmdlParseError(Exception):
    """First syntax violation in a TMDL or JSON document.

    ``line`` and ``column`` are 1-based and point at the offending token;
    for JSON documents ``expected`` carries a JSON-pointer-style path
    instead of a token description.
    """

    def __init__(self, line: int, column: int, expected: str, found: str):
        super().__init__(f"line {line}, column {column}: expected {expected}, found {found}")
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "decimal" | "string" | "punct" | "eof"
    text: str
    line: int
    col: int
    value: object = None


_PUNCT_SINGLE = "{}[]=,:"
_STRING_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


def tokenize(text: str) -> list[Token]:
    """Split TMDL source into tokens; raises TmdlParseError on bad lexemes."""
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(l: int, c: int, expected: str, found: str) -> TmdlParseError:
        return TmdlParseError(l, c, expected, found)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch in _PUNCT_SINGLE:
            tokens.append(Token("punct", ch, start_line, start_col))
            i, col = i + 1, col + 1
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token("punct", "->", start_line, start_col))
                i, col = i + 2, col + 2
                continue
            raise err(start_line, start_col, "'->'", f"'{ch}'")
        if ch == '"':
            i, col = i + 1, col + 1
            parts: list[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise err(start_line, start_col, "closing '\"'", "unterminated string")
                c = text[i]
                if c == '"':
                    i, col = i + 1, col + 1
                    break
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in _STRING_ESCAPES:
                        raise err(line, col, "escape sequence", f"'\\{text[i + 1: i + 2]}'")
                    parts.append(_STRING_ESCAPES[text[i + 1]])
                    i, col = i + 2, col + 2
                    continue
                parts.append(c)
                i, col = i + 1, col + 1
            raw = "".join(parts)
            tokens.append(Token("string", raw, start_line, start_col, raw))
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                if j >= n or not text[j].isdigit():
                    raise err(start_line, start_col, "digits after '.'", f"'{text[i:j]}'")
                while j < n and text[j].isdigit():
                    j += 1
                lexeme = text[i:j]
                tokens.append(Token("decimal", lexeme, start_line, start_col, lexeme))
            else:
                lexeme = text[i:j]
                tokens.append(Token("int", lexeme, start_line, start_col, int(lexeme)))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            tokens.append(Token("ident", lexeme, start_line, start_col, lexeme))
            col += j - i
            i = j
            continue
        raise err(start_line, start_col, "a token", f"character {ch!r}")

    tokens.append(Token("eof", "", line, col))
    return tokens


def describe_token(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "string":
        text = tok.text if len(tok.text) <= 20 else tok.text[:17] + "..."
        return f'string "{text}"'
    return f"'{tok.text}'"


_ITEM_KEYWORDS = ("actor", "process", "store", "flow", "boundary", "threat", "mitigation")
_ELEMENT_KINDS = {
    "actor": ElementKind.EXTERNAL_ACTOR,
    "process": ElementKind.PROCESS,
    "store": ElementKind.DATA_STORE,
}
_ELEMENT_ATTRS = ("name", "zone", "assets", "notes")
_FLOW_ATTRS = ("data", "channel")
_THREAT_ATTRS = ("category", "dread", "printed", "status", "mitigations", "notes")
_MITIGATION_ATTRS = ("standards",)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self._toks = tokens
        self._pos = 0
        self.last_block_close: Token | None = None

    def peek(self) -> Token:
        return self._toks[self._pos]

    def advance(self) -> Token:
        tok = self._toks[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def fail(self, tok: Token, expected: str) -> NoReturn:
        raise TmdlParseError(tok.line, tok.col, expected, describe_token(tok))

    def expect_punct(self, punct: str) -> Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != punct:
            self.fail(tok, f"'{punct}'")
        return self.advance()

    def expect_ident(self, expected: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(tok, expected)
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            self.fail(tok, f"'{word}'")
        return self.advance()

    def expect_string(self, expected: str) -> Token:
        tok = self.peek()
        if tok.kind != "string":
            self.fail(tok, expected)
        return self.advance()

    def expect_int(self, expected: str) -> Token:
        tok = self.peek()
        if tok.kind != "int":
            self.fail(tok, expected)
        return self.advance()

    # -- generic attribute machinery -------------------------------------

    def parse_block(self, allowed: tuple[str, ...]) -> dict[str, tuple[Token, object]]:
        """Parse ``{ attr* }``; returns attr name -> (name token, value)."""
        self.expect_punct("{")
        attrs: dict[str, tuple[Token, object]] = {}
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == "}":
                self.last_block_close = tok
                self.advance()
                return attrs
            if tok.kind != "ident":
                self.fail(tok, "an attribute name or '}'")
            if tok.text not in allowed:
                self.fail(tok, "one of " + ", ".join(f"'{a}'" for a in allowed))
            if tok.text in attrs:
                self.fail(tok, f"at most one '{tok.text}' attribute")
            name_tok = self.advance()
            self.expect_punct("=")
            attrs[name_tok.text] = (name_tok, self.parse_value())

    def parse_value(self) -> object:
        tok = self.peek()
        if tok.kind in ("string", "int", "decimal", "ident"):
            return self.advance()
        if tok.kind == "punct" and tok.text == "[":
            self.advance()
            items = [self.parse_value()]
            while True:
                nxt = self.peek()
                if nxt.kind == "punct" and nxt.text == ",":
                    self.advance()
                    items.append(self.parse_value())
                    continue
                self.expect_punct("]")
                return items
        self.fail(tok, "a value")

    def string_attr(self, attrs, name: str, default: str = "") -> str:
        if name not in attrs:
            return default
        _, value = attrs[name]
        if not isinstance(value, Token) or value.kind != "string":
            self.value_fail(value, "a string")
        return value.text

    def ident_attr(self, attrs, name: str, default: str | None) -> str | None:
        if name not in attrs:
            return default
        _, value = attrs[name]
        if not isinstance(value, Token) or value.kind != "ident":
            self.value_fail(value, "an identifier")
        return value.text

    def string_list_attr(self, attrs, name: str) -> tuple[str, ...]:
        if name not in attrs:
            return ()
        _, value = attrs[name]
        items = value if isinstance(value, list) else [value]
        out = []
        for item in items:
            if not isinstance(item, Token) or item.kind != "string":
                self.value_fail(item, "a string")
            out.append(item.text)
        return tuple(out)

    def ident_list_attr(self, attrs, name: str) -> tuple[str, ...]:
        if name not in attrs:
            return ()
        _, value = attrs[name]
        items = value if isinstance(value, list) else [value]
        out = []
        for item in items:
            if not isinstance(item, Token) or item.kind != "ident":
                self.value_fail(item, "an identifier")
            out.append(item.text)
        return tuple(out)

    def value_fail(self, value: object, expected: str) -> NoReturn:
        tok = value if isinstance(value, Token) else _first_token(value)
        self.fail(tok, expected)


def _first_token(value: object) -> Token:
    while isinstance(value, list):
        value = value[0]
    assert isinstance(value, Token)
    return value


def parse_model(text: str) -> ThreatModel:
    """Parse TMDL source into a ThreatModel.

    Pure and deterministic; entity order matches source order and
    ``validate_model`` is *not* invoked. Raises TmdlParseError at the
    first syntax violation, including duplicate ids within one kind
    (those corrupt the id space and cannot be reported as data).
    """
    p = _Parser(tokenize(text))
    p.expect_keyword("model")
    name_tok = p.expect_string("the model name string")
    p.expect_punct("{")

    # Mutable element records so boundary membership can be folded in
    # after all declarations are seen.
    records: list[dict] = []
    by_id: dict[str, dict] = {}
    flows: list[DataFlowSpec] = []
    threats: list[Threat] = []
    mitigations: list[Mitigation] = []
    spans: dict[str, tuple[int, int]] = {}
    seen: dict[tuple[str, object], Token] = {}  # (kind word, id) -> first token
    contains: list[tuple[str, Token]] = []  # (boundary id, member token)

    def check_unique(kind_word: str, ident: object, tok: Token):
        key = (kind_word, ident)
        if key in seen:
            p.fail(tok, f"a unique {kind_word} id (duplicate id {tok.text!r})")
        seen[key] = tok

    while True:
        tok = p.peek()
        if tok.kind == "punct" and tok.text == "}":
            p.advance()
            break
        if tok.kind != "ident" or tok.text not in _ITEM_KEYWORDS:
            p.fail(tok, "'actor', 'process', 'store', 'flow', 'boundary', 'threat', 'mitigation', or '}'")
        keyword = p.advance().text

        if keyword in _ELEMENT_KINDS:
            id_tok = p.expect_ident(f"an {keyword} id")
            check_unique(keyword, id_tok.text, id_tok)
            attrs = p.parse_block(_ELEMENT_ATTRS)
            record = {
                "id": id_tok.text,
                "name": p.string_attr(attrs, "name", default=id_tok.text),
                "kind": _ELEMENT_KINDS[keyword],
                "zone": p.ident_attr(attrs, "zone", default=None),
                "zone_tok": attrs["zone"][0] if "zone" in attrs else None,
                "assets": p.string_list_attr(attrs, "assets"),
                "notes": p.string_attr(attrs, "notes"),
            }
            records.append(record)
            by_id.setdefault(record["id"], record)
            spans[id_tok.text] = (id_tok.line, id_tok.col)

        elif keyword == "flow":
            id_tok = p.expect_ident("a flow id")
            check_unique("flow", id_tok.text, id_tok)
            p.expect_punct(":")
            src_tok = p.expect_ident("a source element id")
            p.expect_punct("->")
            dst_tok = p.expect_ident("a destination element id")
            attrs = p.parse_block(_FLOW_ATTRS)
            channel_name = p.ident_attr(attrs, "channel", default=Channel.INTERNAL.value)
            try:
                channel = Channel(channel_name)
            except ValueError:
                p.value_fail(attrs["channel"][1], "'internal', 'wireless', or 'physical'")
            flows.append(
                DataFlowSpec(
                    id=id_tok.text,
                    src=src_tok.text,
                    dst=dst_tok.text,
                    data=p.string_attr(attrs, "data"),
                    channel=channel,
                )
            )
            spans[id_tok.text] = (id_tok.line, id_tok.col)

        elif keyword == "boundary":
            id_tok = p.expect_ident("a boundary id")
            check_unique("boundary", id_tok.text, id_tok)
            p.expect_punct("{")
            p.expect_keyword("contains")
            p.expect_punct("=")
            p.expect_punct("[")
            member_toks = [p.expect_ident("an element id")]
            while True:
                nxt = p.peek()
                if nxt.kind == "punct" and nxt.text == ",":
                    p.advance()
                    member_toks.append(p.expect_ident("an element id"))
                    continue
                p.expect_punct("]")
                break
            p.expect_punct("}")
            record = {
                "id": id_tok.text,
                "name": id_tok.text,
                "kind": ElementKind.TRUST_BOUNDARY,
                "zone": None,
                "zone_tok": None,
                "assets": (),
                "notes": "",
            }
            records.append(record)
            by_id.setdefault(record["id"], record)
            spans[id_tok.text] = (id_tok.line, id_tok.col)
            contains.extend((id_tok.text, m) for m in member_toks)

        elif keyword == "threat":
            id_tok = p.expect_int("a threat id (positive integer)")
            if id_tok.value < 1:
                p.fail(id_tok, "a positive threat id")
            check_unique("threat", id_tok.value, id_tok)
            title_tok = p.expect_string("the threat title string")
            p.expect_keyword("on")
            target_tok = p.expect_ident("a target element id")
            attrs = p.parse_block(_THREAT_ATTRS)
            close_tok = p.last_block_close
            for required in ("category", "dread"):
                if required not in attrs:
                    raise TmdlParseError(
                        close_tok.line,
                        close_tok.col,
                        f"a '{required}' attribute on threat {id_tok.value}",
                        "none",
                    )
            category = _category_from(p, attrs["category"][1])
            dread = _dread_from(p, attrs["dread"][1])
            printed = _printed_from(p, attrs) if "printed" in attrs else None
            status_name = p.ident_attr(attrs, "status", default=ThreatStatus.OPEN.value)
            try:
                status = ThreatStatus(status_name)
            except ValueError:
                p.value_fail(attrs["status"][1], "'open', 'mitigated', or 'accepted'")
            threats.append(
                Threat(
                    id=id_tok.value,
                    title=title_tok.text,
                    target=target_tok.text,
                    category=category,
                    dread=dread,
                    printed_tenths=printed,
                    status=status,
                    mitigations=p.ident_list_attr(attrs, "mitigations"),
                    notes=p.string_attr(attrs, "notes"),
                )
            )
            spans[str(id_tok.value)] = (id_tok.line, id_tok.col)

        else:  # mitigation
            id_tok = p.expect_ident("a mitigation id")
            check_unique("mitigation", id_tok.text, id_tok)
            desc_tok = p.expect_string("the mitigation description string")
            p.expect_keyword("for")
            cats = [_category_token(p)]
            while True:
                nxt = p.peek()
                if nxt.kind == "punct" and nxt.text == ",":
                    p.advance()
                    cats.append(_category_token(p))
                    continue
                break
            attrs = p.parse_block(_MITIGATION_ATTRS)
            mitigations.append(
                Mitigation(
                    id=id_tok.text,
                    description=desc_tok.text,
                    addresses=tuple(cats),
                    standards=p.string_list_attr(attrs, "standards"),
                )
            )

    eof = p.peek()
    if eof.kind != "eof":
        p.fail(eof, "end of input")

    # Fold boundary membership into element zones.
    for boundary_id, member in contains:
        record = by_id.get(member.text)
        if record is None or record["kind"] is ElementKind.TRUST_BOUNDARY:
            p.fail(member, "a declared actor, process, or store id")
        if record["zone"] is not None and record["zone"] != boundary_id:
            p.fail(
                member,
                f"element '{member.text}' in a single zone "
                f"(already in '{record['zone']}')",
            )
        record["zone"] = boundary_id

    elements = tuple(
        Element(
            id=r["id"],
            name=r["name"],
            kind=r["kind"],
            zone=r["zone"] if r["zone"] is not None else "none",
            assets=r["assets"],
            notes=r["notes"],
        )
        for r in records
    )
    return ThreatModel(
        name=name_tok.text,
        elements=elements,
        flows=tuple(flows),
        threats=tuple(threats),
        mitigations=tuple(mitigations),
        spans=spans,
    )


def _category_from(p: _Parser, value: object) -> ThreatCategory:
    if not isinstance(value, Token) or value.kind != "ident":
        p.value_fail(value, "a STRIDE category name")
    category = ThreatCategory.from_name(value.text)
    if category is None:
        p.fail(value, "a STRIDE category name")
    return category


def _category_token(p: _Parser) -> ThreatCategory:
    tok = p.expect_ident("a STRIDE category name")
    category = ThreatCategory.from_name(tok.text)
    if category is None:
        p.fail(tok, "a STRIDE category name")
    return category


def _dread_from(p: _Parser, value: object) -> DreadVector:
    items = value if isinstance(value, list) else [value]
    if len(items) != 5:
        p.value_fail(items, f"a list of 5 sub-scores (got {len(items)})")
    components = []
    for item in items:
        if not isinstance(item, Token) or item.kind != "int" or not 1 <= item.value <= 4:
            p.value_fail(item, "an integer in [1, 4]")
        components.append(item.value)
    return DreadVector.from_components(components)


def _printed_from(p: _Parser, attrs) -> int:
    _, value = attrs["printed"]
    if not isinstance(value, Token) or value.kind not in ("int", "decimal"):
        p.value_fail(value, "a one-decimal value")
    try:
        return decimal_to_tenths(value.text)
    except ValueError:
        p.fail(value, "a one-decimal value")


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------

_ESCAPE_OUT = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _string(text: str) -> str:
    return '"' + "".join(_ESCAPE_OUT.get(c, c) for c in text) + '"'


def _block(indent: str, header: str, attrs: list[str]) -> list[str]:
    if not attrs:
        return [f"{indent}{header} {{ }}"]
    lines = [f"{indent}{header} {{"]
    lines.extend(f"{indent}  {attr}" for attr in attrs)
    lines.append(f"{indent}}}")
    return lines


def serialize_model(model: ThreatModel) -> str:
    """Render the canonical TMDL form of a valid model.

    Two-space indentation; entities ordered actors, processes, stores,
    flows, boundaries, threats (numeric id order), mitigations (lexical id
    order). ``parse_model(serialize_model(m)) == m`` for every valid
    model, and the output is a fixed point of parse-then-serialize.

    Raises ValueError for models that fail ``validate_model`` (callers
    must validate first) and for boundaries with no members, which the
    grammar cannot express.
    """
    violations = validate_model(model)
    if violations:
        raise ValueError(
            f"refusing to serialize an invalid model: {violations[0].message}"
        )

    actors, processes, stores, flows, boundaries = canonical_entity_order(model)
    canonical_nodes = actors + processes + stores
    lines = [f"model {_string(model.name)} {{"]

    for el in canonical_nodes:
        attrs = []
        if el.name != el.id:
            attrs.append(f"name = {_string(el.name)}")
        if el.assets:
            attrs.append("assets = [" + ", ".join(_string(a) for a in el.assets) + "]")
        if el.notes:
            attrs.append(f"notes = {_string(el.notes)}")
        lines.extend(_block("  ", f"{el.kind.value} {el.id}", attrs))

    for fl in flows:
        attrs = []
        if fl.data:
            attrs.append(f"data = {_string(fl.data)}")
        if fl.channel is not Channel.INTERNAL:
            attrs.append(f"channel = {fl.channel.value}")
        lines.extend(_block("  ", f"flow {fl.id}: {fl.src} -> {fl.dst}", attrs))

    for boundary in boundaries:
        members = [el.id for el in canonical_nodes if el.zone == boundary.id]
        if not members:
            raise ValueError(
                f"boundary '{boundary.id}' has no members; "
                "an empty contains list is not expressible in TMDL"
            )
        lines.extend(
            _block("  ", f"boundary {boundary.id}", ["contains = [" + ", ".join(members) + "]"])
        )

    for t in sorted(model.threats, key=lambda t: t.id):
        attrs = [f"category = {t.category.value}"]
        attrs.append("dread = [" + ", ".join(str(c) for c in t.dread.components()) + "]")
        if t.printed_tenths is not None:
            attrs.append(f"printed = {tenths_to_decimal(t.printed_tenths)}")
        if t.status is not ThreatStatus.OPEN:
            attrs.append(f"status = {t.status.value}")
        if t.mitigations:
            attrs.append("mitigations = [" + ", ".join(t.mitigations) + "]")
        if t.notes:
            attrs.append(f"notes = {_string(t.notes)}")
        lines.extend(_block("  ", f"threat {t.id} {_string(t.title)} on {t.target}", attrs))

    for m in sorted(model.mitigations, key=lambda m: m.id):
        cats = ", ".join(c.value for c in m.addresses)
        attrs = []
        if m.standards:
            attrs.append("standards = [" + ", ".join(_string(s) for s in m.standards) + "]")
        lines.extend(_block("  ", f"mitigation {m.id} {_string(m.description)} for {cats}", attrs))

    lines.append("}")
    return "\n".join(lines) + "\n"
