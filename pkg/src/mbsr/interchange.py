"""File formats: corpus load/save, XMI, ReqIF-lite, CSV tables, reports.

The corpus block format is the storage format and the only one that is
loaded as well as saved with full fidelity. XMI export follows the profile
element layout (one Requirement_Expression per requirement, slot references
by internal id, mangled attribute names) and can re-import its own output.
ReqIF export is deliberately lossy: slot structure flattens to statement
text and model element references are dropped, which mirrors how generic
requirement interchange loses the model-based content; the mapping file
controls attribute naming. No exporter mutates the model.
"""

from __future__ import annotations

import csv
import io
import re
import uuid
from datetime import datetime
from pathlib import Path
from typing import Callable
from xml.etree import ElementTree

from .blockfile import Block, parse_blocks, render_blocks
from .catalog import TBX_ID, AttributeDef, Automation, Catalog, ValueKind
from .errors import (
    CorpusValidationError,
    InvariantViolationError,
    MappingMissingError,
    MbsrError,
    UnknownColumnError,
)
from .glossary import GlossaryTerm, annotate
from .metrics import compute_slot_completeness
from .model import (
    FIXED_EPOCH,
    SLOT_FIELDS,
    AttributeValue,
    ElementKind,
    ExpressionKind,
    LinkKind,
    Model,
    ModelElement,
    RequirementExpression,
    RequirementSet,
    SlotValue,
    StructuredStatement,
)
from .parser import parse_statement
from .rules import TBX_RE
from .trace import add_link, kdr_view

BLOCK_KINDS = ("element", "requirement", "set", "term", "link")

_SLOT_KEYS = ("SR1", "SR2", "SR3", "SR4", "SR5")
_SLOT_TEXT_KEYS = {f"sr{n}": f"SR{n}" for n in range(1, 6)}
_SLOT_REF_KEYS = {f"sr{n}_ref": f"SR{n}" for n in range(1, 6)}

XMI_NS = "http://www.omg.org/spec/XMI/20131001"
PROFILE = "Model_Based_Structured_Requirements_Profile"
PROFILE_NS = "urn:mbsr:profile"
REQIF_NS = "http://www.omg.org/spec/ReqIF/20110401/reqif.xsd"

XMI_SLOT_NAMES = {
    "SR1": "SR1_Condition",
    "SR2": "SR2_Subject",
    "SR3": "SR3_Action",
    "SR4": "SR4_Object",
    "SR5": "SR5_Constraint_of_Action",
}


# --- corpus loading ---


def _wrap(block: Block, exc: MbsrError) -> CorpusValidationError:
    return CorpusValidationError(
        f"[{block.kind} {block.ident}] {type(exc).__name__}: {exc}", block.line)


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _attribute_value(catalog: Catalog, key: str, raw: str, block: Block) -> AttributeValue:
    attr_def = catalog.attributes.get(key)
    if attr_def is None:
        raise CorpusValidationError(
            f"[{block.kind} {block.ident}] unknown attribute key {key!r}",
            block.field_lines.get(key, block.line))
    if attr_def.value_kind == ValueKind.ENUM:
        return AttributeValue.enum(raw)
    if attr_def.value_kind == ValueKind.ELEMENT_REF:
        return AttributeValue.ref(raw)
    if attr_def.value_kind == ValueKind.TIMESTAMP:
        try:
            return AttributeValue.stamp(datetime.fromisoformat(raw))
        except ValueError:
            raise CorpusValidationError(
                f"[{block.kind} {block.ident}] {key}: not an ISO-8601 timestamp: {raw!r}",
                block.field_lines.get(key, block.line)) from None
    return AttributeValue.text(raw)


def _is_attribute_key(key: str) -> bool:
    return bool(re.match(r"^[AX][A-Za-z0-9]", key))


def _load_element(model: Model, block: Block) -> None:
    known = {"name", "kind"}
    for key in block.fields:
        if key not in known:
            raise CorpusValidationError(
                f"[element {block.ident}] unknown key {key!r}",
                block.field_lines.get(key, block.line))
    try:
        kind = ElementKind(block.fields.get("kind", "Other"))
    except ValueError:
        raise CorpusValidationError(
            f"[element {block.ident}] unknown element kind {block.fields.get('kind')!r}",
            block.line) from None
    try:
        model.add_element(ModelElement(block.ident, block.fields.get("name", block.ident), kind))
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def _load_term(model: Model, block: Block) -> None:
    known = {"definition", "source", "synonyms", "allocations"}
    for key in block.fields:
        if key not in known:
            raise CorpusValidationError(
                f"[term {block.ident}] unknown key {key!r}",
                block.field_lines.get(key, block.line))
    allocations = tuple(_split_list(block.fields.get("allocations", "")))
    for element_id in allocations:
        if not model.has_element(element_id):
            raise CorpusValidationError(
                f"[term {block.ident}] allocation {element_id!r} is not a known element",
                block.line)
    term = GlossaryTerm(
        term=block.ident,
        synonyms=tuple(_split_list(block.fields.get("synonyms", ""))),
        definition=block.fields.get("definition", ""),
        source=block.fields.get("source", ""),
        allocations=allocations,
    )
    try:
        model.glossary.add_term(term)
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def _expression_kind(block: Block) -> ExpressionKind:
    raw = block.fields.get("kind", ExpressionKind.REQUIREMENT.value)
    try:
        return ExpressionKind(raw)
    except ValueError:
        raise CorpusValidationError(
            f"[{block.kind} {block.ident}] unknown expression kind {raw!r}",
            block.line) from None


def _statement_from_fields(block: Block) -> StructuredStatement | None:
    pattern = block.fields.get("pattern")
    slot_values: dict[str, SlotValue | None] = {}
    for low, key in _SLOT_TEXT_KEYS.items():
        text = block.fields.get(low)
        ref = block.fields.get(f"{low}_ref")
        if text is None:
            if ref is not None:
                raise CorpusValidationError(
                    f"[{block.kind} {block.ident}] {low}_ref given without {low}",
                    block.field_lines.get(f"{low}_ref", block.line))
            continue
        slot_values[SLOT_FIELDS[key]] = SlotValue(text, ref)
    if pattern is None:
        if slot_values:
            raise CorpusValidationError(
                f"[{block.kind} {block.ident}] slot values given without a pattern",
                block.line)
        return None
    try:
        return StructuredStatement(pattern=pattern, **slot_values)
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def _load_requirement(model: Model, block: Block) -> None:
    reserved = {"name", "kind", "text", "pattern"}
    attributes: dict[str, AttributeValue] = {}
    for key, raw in block.fields.items():
        if key in reserved or key in _SLOT_TEXT_KEYS or key in _SLOT_REF_KEYS:
            continue
        if not _is_attribute_key(key):
            raise CorpusValidationError(
                f"[requirement {block.ident}] unknown key {key!r}",
                block.field_lines.get(key, block.line))
        attributes[key] = _attribute_value(model.catalog, key, raw, block)
    expr = RequirementExpression(
        id=block.ident,
        name=block.fields.get("name", block.ident),
        text=block.fields.get("text", ""),
        statement=_statement_from_fields(block),
        attributes=attributes,
        kind=_expression_kind(block),
    )
    try:
        model.add_expression(expr)
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def _load_set_shell(model: Model, block: Block) -> None:
    reserved = {"name", "kind", "members"}
    attributes: dict[str, AttributeValue] = {}
    for key, raw in block.fields.items():
        if key in reserved:
            continue
        if not _is_attribute_key(key):
            raise CorpusValidationError(
                f"[set {block.ident}] unknown key {key!r}",
                block.field_lines.get(key, block.line))
        attributes[key] = _attribute_value(model.catalog, key, raw, block)
    rset = RequirementSet(
        id=block.ident,
        name=block.fields.get("name", block.ident),
        attributes=attributes,
        kind=_expression_kind(block),
    )
    try:
        model.add_set(rset)
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def _fill_set(model: Model, block: Block) -> None:
    members = _split_list(block.fields.get("members", ""))
    if not members:
        return
    try:
        model.set_members(block.ident, members, touch=False)
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def _load_link(model: Model, block: Block) -> None:
    known = {"kind", "source", "target"}
    for key in block.fields:
        if key not in known:
            raise CorpusValidationError(
                f"[link {block.ident}] unknown key {key!r}",
                block.field_lines.get(key, block.line))
    missing = known - set(block.fields)
    if missing:
        raise CorpusValidationError(
            f"[link {block.ident}] missing key(s) {sorted(missing)}", block.line)
    try:
        kind = LinkKind(block.fields["kind"])
    except ValueError:
        raise CorpusValidationError(
            f"[link {block.ident}] unknown link kind {block.fields['kind']!r}",
            block.line) from None
    try:
        add_link(model, kind, block.fields["source"], block.fields["target"],
                 link_id=block.ident)
    except MbsrError as exc:
        raise _wrap(block, exc) from exc


def loads_corpus(text: str, catalog: Catalog | None = None,
                 clock: Callable[[], datetime] | None = None,
                 model_uuid: uuid.UUID | None = None) -> Model:
    """Build a fully validated model from corpus text."""
    model = Model(catalog=catalog, clock=clock, model_uuid=model_uuid)
    blocks = parse_blocks(text)
    by_kind: dict[str, list[Block]] = {kind: [] for kind in BLOCK_KINDS}
    for block in blocks:
        if block.kind not in by_kind:
            raise CorpusValidationError(
                f"unknown block kind {block.kind!r}", block.line)
        by_kind[block.kind].append(block)
    for block in by_kind["element"]:
        _load_element(model, block)
    for block in by_kind["term"]:
        _load_term(model, block)
    for block in by_kind["requirement"]:
        _load_requirement(model, block)
    for block in by_kind["set"]:
        _load_set_shell(model, block)
    for block in by_kind["set"]:
        _fill_set(model, block)
    for block in by_kind["link"]:
        _load_link(model, block)
    return model


def load_corpus(path: str | Path, catalog: Catalog | None = None,
                clock: Callable[[], datetime] | None = None,
                model_uuid: uuid.UUID | None = None) -> Model:
    return loads_corpus(Path(path).read_text(encoding="utf-8"),
                        catalog=catalog, clock=clock, model_uuid=model_uuid)


# --- corpus serialization ---


def _slot_fields_of(expr: RequirementExpression, fields: dict[str, str]) -> None:
    statement = expr.statement
    if statement is None:
        return
    fields["pattern"] = statement.pattern
    for key in _SLOT_KEYS:
        slot = statement.slot(key)
        if slot is None:
            continue
        fields[key.lower()] = slot.text
        if slot.binding is not None:
            fields[f"{key.lower()}_ref"] = slot.binding


def serialize_corpus(model: Model) -> str:
    """Canonical corpus text: blocks grouped by kind, ids sorted, fixed keys."""
    blocks: list[Block] = []

    for element in model.elements():
        blocks.append(Block("element", element.element_id, 0, {
            "name": element.name, "kind": element.kind.value}))

    for expr in model.expressions():
        if expr.is_set:
            continue
        fields: dict[str, str] = {"name": expr.name}
        if expr.kind != ExpressionKind.REQUIREMENT:
            fields["kind"] = expr.kind.value
        if expr.text:
            fields["text"] = expr.text
        _slot_fields_of(expr, fields)
        for key in sorted(expr.attributes):
            fields[key] = expr.attributes[key].display()
        blocks.append(Block("requirement", expr.id, 0, fields))

    for expr in model.expressions():
        if not expr.is_set:
            continue
        fields = {"name": expr.name}
        if expr.kind != ExpressionKind.REQUIREMENT:
            fields["kind"] = expr.kind.value
        if expr.members:
            fields["members"] = ", ".join(expr.members)
        for key in sorted(expr.attributes):
            fields[key] = expr.attributes[key].display()
        blocks.append(Block("set", expr.id, 0, fields))

    for term in model.glossary.terms():
        fields = {}
        if term.definition:
            fields["definition"] = term.definition
        if term.source:
            fields["source"] = term.source
        if term.synonyms:
            fields["synonyms"] = ", ".join(sorted(term.synonyms))
        if term.allocations:
            fields["allocations"] = ", ".join(sorted(term.allocations))
        blocks.append(Block("term", term.term, 0, fields))

    for link in model.links():
        blocks.append(Block("link", link.link_id, 0, {
            "kind": link.kind.value, "source": link.source_id,
            "target": link.target_id}))

    return render_blocks(blocks)


def save_corpus(model: Model, path: str | Path) -> None:
    Path(path).write_text(serialize_corpus(model), encoding="utf-8")


# --- XMI export / import ---


def internal_id(model: Model, any_id: str) -> str:
    """Stable opaque id derived from (model uuid, public id)."""
    return "_" + uuid.uuid5(model.model_uuid, any_id).hex


def mangled_attribute_name(attr_def: AttributeDef) -> str:
    """Profile attribute name: key + display name, non-alphanumerics to '_',
    trailing '_' marking minimum-set membership."""
    base = re.sub(r"[^A-Za-z0-9]", "_", f"{attr_def.attribute_key} {attr_def.name}")
    return base + ("_" if attr_def.minimum_set else "")


def _xml_escape(value: str) -> str:
    return (value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace("'", "&apos;").replace("\r", "&#13;").replace("\n", "&#10;")
            .replace("\t", "&#9;"))


def _xml_element(tag: str, attrs: list[tuple[str, str]], indent: str = "  ") -> str:
    lines = [f"{indent}<{tag}"]
    for name, value in attrs:
        lines.append(f"{indent}    {name}='{_xml_escape(value)}'")
    lines.append(f"{indent}/>")
    return "\n".join(lines)


def _expression_tag(expr: RequirementExpression) -> str:
    if expr.is_set:
        return "Requirement_Set" if expr.kind == ExpressionKind.REQUIREMENT else "Need_Set"
    return "Requirement_Expression" if expr.kind == ExpressionKind.REQUIREMENT else "Need"


def export_xmi(model: Model, scope_id: str | None = None) -> str:
    """Profile XMI for the scope: named elements, requirements, sets.

    Requirement elements carry exactly the published attribute layout:
    xmi:id, base_Class, Id, Text, bound slots as SRn references, then
    attributes in ascending key order under mangled names. Attribute order
    is a documented normalization; emission is deterministic.
    """
    exprs = sorted(model.scope_expressions(scope_id), key=lambda e: e.id)
    out: list[str] = [
        "<?xml version='1.0' encoding='UTF-8'?>",
        f"<xmi:XMI xmi:version='2.5' xmlns:xmi='{XMI_NS}' xmlns:{PROFILE}='{PROFILE_NS}'>",
    ]
    for element in model.elements():
        out.append(_xml_element(f"{PROFILE}:Named_Element", [
            ("xmi:id", internal_id(model, element.element_id)),
            ("Id", element.element_id),
            ("Name", element.name),
            ("Kind", element.kind.value),
        ]))
    for expr in exprs:
        base = internal_id(model, expr.id)
        attrs: list[tuple[str, str]] = [
            ("xmi:id", base + "_"),
            ("base_Class", base),
            ("Id", expr.id),
        ]
        if expr.is_set:
            attrs.append(("Name", expr.name))
            members = " ".join(internal_id(model, m) for m in expr.members)
            attrs.append(("Members", members))
        else:
            attrs.append(("Text", expr.text))
            if expr.statement is not None:
                for key in _SLOT_KEYS:
                    slot = expr.statement.slot(key)
                    if slot is not None and slot.binding is not None:
                        attrs.append((XMI_SLOT_NAMES[key],
                                      internal_id(model, slot.binding)))
            for key in sorted(expr.attributes):
                attr_def = model.catalog.attributes[key]
                attrs.append((mangled_attribute_name(attr_def),
                              expr.attributes[key].display()))
        out.append(_xml_element(f"{PROFILE}:{_expression_tag(expr)}", attrs))
    out.append("</xmi:XMI>")
    return "\n".join(out) + "\n"


def import_xmi(text: str, catalog: Catalog | None = None,
               clock: Callable[[], datetime] | None = None,
               model_uuid: uuid.UUID | None = None) -> Model:
    """Rebuild a model from XMI produced by export_xmi.

    Statement slots are re-derived by parsing Text; slot bindings are then
    restored from the SRn references. Requirement names are not carried by
    the profile layout, so the public id doubles as the name. Trace links
    are not part of the XMI surface.
    """
    model = Model(catalog=catalog, clock=clock, model_uuid=model_uuid)
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError as exc:
        raise CorpusValidationError(f"not well-formed XMI: {exc}") from exc

    xmi_id_key = f"{{{XMI_NS}}}id"
    q = f"{{{PROFILE_NS}}}"
    reverse_attr = {mangled_attribute_name(d): key
                    for key, d in model.catalog.attributes.items()}
    reverse_slot = {name: key for key, name in XMI_SLOT_NAMES.items()}

    public_of: dict[str, str] = {}
    for entry in root:
        iid = entry.get(xmi_id_key)
        public = entry.get("Id")
        if iid and public:
            public_of[iid] = public
            if entry.tag != q + "Named_Element":
                public_of[iid.rstrip("_")] = public

    for entry in root:
        if entry.tag != q + "Named_Element":
            continue
        model.add_element(ModelElement(
            entry.get("Id", ""), entry.get("Name", ""),
            ElementKind(entry.get("Kind", "Other"))))

    def _read_attrs(entry) -> dict[str, AttributeValue]:
        out: dict[str, AttributeValue] = {}
        for name, raw in entry.attrib.items():
            if name in (xmi_id_key, "base_Class", "Id", "Text", "Name", "Members"):
                continue
            if name in reverse_slot:
                continue
            key = reverse_attr.get(name)
            if key is None:
                raise CorpusValidationError(f"unknown profile attribute {name!r}")
            attr_def = model.catalog.attributes[key]
            if attr_def.value_kind == ValueKind.ENUM:
                out[key] = AttributeValue.enum(raw)
            elif attr_def.value_kind == ValueKind.ELEMENT_REF:
                out[key] = AttributeValue.ref(raw)
            elif attr_def.value_kind == ValueKind.TIMESTAMP:
                out[key] = AttributeValue.stamp(datetime.fromisoformat(raw))
            else:
                out[key] = AttributeValue.text(raw)
        return out

    set_entries = []
    for entry in root:
        local = entry.tag[len(q):] if entry.tag.startswith(q) else entry.tag
        if local in ("Requirement_Set", "Need_Set"):
            set_entries.append((entry, local))
            continue
        if local not in ("Requirement_Expression", "Need"):
            continue
        public = entry.get("Id", "")
        text_value = entry.get("Text", "")
        kind = (ExpressionKind.REQUIREMENT if local == "Requirement_Expression"
                else ExpressionKind.NEED)
        bindings: dict[str, str] = {}
        for name, key in reverse_slot.items():
            ref = entry.get(name)
            if ref is not None:
                if ref not in public_of:
                    raise CorpusValidationError(
                        f"{public}: slot reference {ref!r} does not resolve")
                bindings[key] = public_of[ref]
        statement = None
        if bindings:
            parsed, _ = parse_statement(text_value, None, model.catalog)
            slot_values: dict[str, SlotValue | None] = {}
            for key, field_name in SLOT_FIELDS.items():
                slot = parsed.slot(key)
                if slot is None:
                    continue
                slot_values[field_name] = SlotValue(slot.text, bindings.get(key))
            statement = StructuredStatement(pattern=parsed.pattern, **slot_values)
        model.add_expression(RequirementExpression(
            id=public, name=public, text=text_value, statement=statement,
            attributes=_read_attrs(entry), kind=kind))

    for entry, local in set_entries:
        kind = (ExpressionKind.REQUIREMENT if local == "Requirement_Set"
                else ExpressionKind.NEED)
        model.add_set(RequirementSet(
            id=entry.get("Id", ""), name=entry.get("Name", entry.get("Id", "")),
            attributes=_read_attrs(entry), kind=kind))
    for entry, _ in set_entries:
        members = [public_of[m] for m in entry.get("Members", "").split() if m]
        if members:
            model.set_members(entry.get("Id", ""), members, touch=False)
    return model


# --- ReqIF-lite export ---


def load_attribute_mapping(text: str) -> dict[str, str]:
    """Parse 'KEY = ReqIF name' lines; '#' comments and blanks are skipped."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CorpusValidationError(
                f"expected 'KEY = name': {line!r}", lineno)
        key, _, value = line.partition("=")
        mapping[key.strip()] = value.strip()
    return mapping


def _identifier(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", name).strip("-")


def export_reqif(model: Model, scope_id: str | None = None,
                 mapping: dict[str, str] | None = None,
                 created: datetime | None = None) -> str:
    """Minimal ReqIF: mapped attribute values and set hierarchy only.

    Slot structure flattens to the statement text and element references
    are dropped; that loss is inherent to the target format. Populated
    attributes without a mapping entry fail loudly rather than silently
    dropping data.
    """
    mapping = dict(mapping or {})
    stamp = (created if created is not None else FIXED_EPOCH).isoformat()
    exprs = [e for e in sorted(model.scope_expressions(scope_id), key=lambda e: e.id)
             if not e.is_set]

    used_names: list[str] = ["ReqIF.Text"]
    for expr in exprs:
        for key in sorted(expr.attributes):
            if key not in mapping:
                raise MappingMissingError(key)
            name = mapping[key]
            if name not in used_names:
                used_names.append(name)

    out: list[str] = [
        "<?xml version='1.0' encoding='UTF-8'?>",
        f"<REQ-IF xmlns='{REQIF_NS}'>",
        "  <THE-HEADER>",
        "    <REQ-IF-HEADER IDENTIFIER='export'>",
        f"      <CREATION-TIME>{stamp}</CREATION-TIME>",
        "      <TITLE>Requirement export</TITLE>",
        "    </REQ-IF-HEADER>",
        "  </THE-HEADER>",
        "  <CORE-CONTENT>",
        "    <REQ-IF-CONTENT>",
        "      <SPEC-TYPES>",
        "        <SPEC-OBJECT-TYPE IDENTIFIER='sot-requirement' LONG-NAME='Requirement'>",
        "          <SPEC-ATTRIBUTES>",
    ]
    for name in used_names:
        out.append(f"            <ATTRIBUTE-DEFINITION-STRING "
                   f"IDENTIFIER='ad-{_identifier(name)}' LONG-NAME='{_xml_escape(name)}' />")
    out.extend([
        "          </SPEC-ATTRIBUTES>",
        "        </SPEC-OBJECT-TYPE>",
        "      </SPEC-TYPES>",
        "      <SPEC-OBJECTS>",
    ])

    for expr in exprs:
        last_change = expr.attributes["A14"].display() if "A14" in expr.attributes else stamp
        out.append(f"        <SPEC-OBJECT IDENTIFIER='{_xml_escape(expr.id)}' "
                   f"LAST-CHANGE='{last_change}'>")
        out.append("          <TYPE><SPEC-OBJECT-TYPE-REF>sot-requirement"
                   "</SPEC-OBJECT-TYPE-REF></TYPE>")
        out.append("          <VALUES>")
        pairs = [("ReqIF.Text", expr.text)]
        for key in sorted(expr.attributes):
            pairs.append((mapping[key], expr.attributes[key].display()))
        for name, value in pairs:
            out.append(f"            <ATTRIBUTE-VALUE-STRING THE-VALUE='{_xml_escape(value)}'>")
            out.append(f"              <DEFINITION><ATTRIBUTE-DEFINITION-STRING-REF>"
                       f"ad-{_identifier(name)}</ATTRIBUTE-DEFINITION-STRING-REF></DEFINITION>")
            out.append("            </ATTRIBUTE-VALUE-STRING>")
        out.append("          </VALUES>")
        out.append("        </SPEC-OBJECT>")
    out.append("      </SPEC-OBJECTS>")

    if scope_id and scope_id != "all":
        roots = [scope_id]
    else:
        roots = [e.id for e in model.expressions()
                 if e.is_set and model.parent_set(e.id) is None]

    out.append("      <SPECIFICATIONS>")

    def _hierarchy(node_id: str, depth: int) -> None:
        pad = " " * (10 + 2 * depth)
        expr = model.expression(node_id)
        hid = _identifier(f"h-{node_id}")
        if expr.is_set:
            out.append(f"{pad}<SPEC-HIERARCHY IDENTIFIER='{hid}' "
                       f"LONG-NAME='{_xml_escape(expr.name)}'>")
            out.append(f"{pad}  <CHILDREN>")
            for member in expr.members:
                _hierarchy(member, depth + 2)
            out.append(f"{pad}  </CHILDREN>")
            out.append(f"{pad}</SPEC-HIERARCHY>")
        else:
            out.append(f"{pad}<SPEC-HIERARCHY IDENTIFIER='{hid}'>")
            out.append(f"{pad}  <OBJECT><SPEC-OBJECT-REF>{_xml_escape(node_id)}"
                       f"</SPEC-OBJECT-REF></OBJECT>")
            out.append(f"{pad}</SPEC-HIERARCHY>")

    for root_id in roots:
        rset = model.expression(root_id)
        out.append(f"        <SPECIFICATION IDENTIFIER='{_xml_escape(root_id)}' "
                   f"LONG-NAME='{_xml_escape(rset.name)}'>")
        out.append("          <CHILDREN>")
        if rset.is_set:
            for member in rset.members:
                _hierarchy(member, 2)
        out.append("          </CHILDREN>")
        out.append("        </SPECIFICATION>")
    out.append("      </SPECIFICATIONS>")
    out.extend([
        "    </REQ-IF-CONTENT>",
        "  </CORE-CONTENT>",
        "</REQ-IF>",
    ])
    return "\n".join(out) + "\n"


# --- requirement table CSV ---


def export_table(model: Model, scope_id: str | None, columns: list[str]) -> str:
    """One CSV row per non-set expression in scope.

    Columns: id, name, text, SR1..SR5, any attribute key, or a rule or
    characteristic node id rendered as S/V/M (M = no recorded verdict).
    """
    for column in columns:
        if column in ("id", "name", "text") or column in _SLOT_KEYS:
            continue
        if column in model.catalog.attributes or model.catalog.is_graph_node(column):
            continue
        raise UnknownColumnError(f"unknown table column {column!r}")

    def cell(expr: RequirementExpression, column: str) -> str:
        if column == "id":
            return expr.id
        if column == "name":
            return expr.name
        if column == "text":
            return expr.text
        if column in _SLOT_KEYS:
            if expr.statement is None:
                return ""
            slot = expr.statement.slot(column)
            return slot.text if slot is not None else ""
        if column in model.catalog.attributes:
            if column == "A15":
                return expr.id
            if column == "A16":
                return expr.name
            value = expr.attributes.get(column)
            return value.display() if value is not None else ""
        for link in model.links_from(expr.id):
            if link.target_id == column:
                if link.kind == LinkKind.SATISFY:
                    return "S"
                if link.kind == LinkKind.VIOLATE:
                    return "V"
        return "M"

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for expr in sorted(model.scope_expressions(scope_id), key=lambda e: e.id):
        if expr.is_set:
            continue
        writer.writerow([cell(expr, column) for column in columns])
    return out.getvalue()


# --- Markdown reports ---


def _underline_terms(text: str, model: Model) -> str:
    spans = annotate(text, model.glossary)
    out: list[str] = []
    cursor = 0
    for start, end, _term in spans:
        out.append(text[cursor:start])
        out.append(f"<u>{text[start:end]}</u>")
        cursor = end
    out.append(text[cursor:])
    return "".join(out)


def _verdict_letter(model: Model, expr_id: str, node_id: str) -> str:
    for link in model.links_from(expr_id):
        if link.target_id == node_id:
            if link.kind == LinkKind.SATISFY:
                return "S"
            if link.kind == LinkKind.VIOLATE:
                return "V"
    return "M"


def _overview_report(model: Model, scope_id: str | None) -> str:
    exprs = [e for e in sorted(model.scope_expressions(scope_id), key=lambda e: e.id)
             if not e.is_set]
    lines = ["# Requirements Overview", "",
             f"Scope: {scope_id if scope_id else 'all'}", "",
             "## Requirements", ""]
    for expr in exprs:
        lines.append(f"### {expr.id} {expr.name}".rstrip())
        lines.append("")
        lines.append(_underline_terms(expr.text, model) if expr.text else "(no text)")
        lines.append("")
    metric = compute_slot_completeness(model, scope_id)
    lines.extend([
        "## Completeness", "",
        f"Total requirements: {metric.total}",
        f"Pattern-complete: {metric.complete} ({metric.pct:.2f}%)",
        "Slot fill: " + ", ".join(
            f"{key} {count}" for key, count in zip(_SLOT_KEYS, metric.slot_counts)),
        "",
        "## Key and Driving Requirements", "",
    ])
    rows = kdr_view(model, scope_id)
    if rows:
        for row in rows:
            chain = f" derives from {' -> '.join(row.derives_from)}" if row.derives_from else ""
            lines.append(f"- {row.expression_id} ({row.marker}){chain}")
    else:
        lines.append("(none flagged via A38)")
    lines.append("")
    return "\n".join(lines)


def _tbx_occurrences(model: Model, expr: RequirementExpression
                     ) -> list[tuple[str, str]]:
    """(token, location) pairs for every placeholder in text and attributes."""
    found: list[tuple[str, str]] = []
    for match in TBX_RE.finditer(expr.text):
        found.append((match.group(0), f"text {match.start()}..{match.end()}"))
    for key in sorted(expr.attributes):
        value = expr.attributes[key]
        if value.kind != ValueKind.TEXT:
            continue
        for match in TBX_RE.finditer(str(value.value)):
            found.append((match.group(0), f"attribute {key}"))
    return found


def _set_review_report(model: Model, scope_id: str | None) -> str:
    if scope_id and scope_id != "all":
        set_ids = [scope_id] + [i for i in model.transitive_members(scope_id)
                                if model.expression(i).is_set]
    else:
        set_ids = [e.id for e in model.expressions() if e.is_set]

    node_ids = [rid for rid, rule in sorted(model.catalog.rules.items(),
                                            key=lambda kv: int(kv[0][1:]))
                if rule.automation == Automation.AUTOMATED and rule.enabled]
    node_ids.append(TBX_ID)

    lines = ["# Set Review", ""]
    if not set_ids:
        lines.extend(["(no sets in scope)", ""])
        return "\n".join(lines)

    for set_id in set_ids:
        rset = model.expression(set_id)
        lines.append(f"## Set {set_id} ({rset.name})")
        lines.append("")
        members = [model.expression(i) for i in model.transitive_members(set_id)]
        rows = [m for m in members if not m.is_set]
        lines.append(f"Direct members: {len(rset.members)}; "
                     f"transitive requirements: {len(rows)}")
        lines.append("")
        lines.append("### Satisfaction Matrix")
        lines.append("")
        lines.append("| requirement | " + " | ".join(node_ids) + " |")
        lines.append("| --- |" + " --- |" * len(node_ids))
        for expr in rows:
            cells = [_verdict_letter(model, expr.id, n) for n in node_ids]
            lines.append(f"| {expr.id} | " + " | ".join(cells) + " |")
        lines.append("")
        lines.append("### TBX Summary")
        lines.append("")
        occurrences: list[str] = []
        for expr in rows:
            for token, where in _tbx_occurrences(model, expr):
                occurrences.append(f"- {expr.id}: {token} ({where})")
        lines.append(f"{len(occurrences)} unresolved placeholder(s)")
        lines.extend(occurrences)
        lines.append("")
    return "\n".join(lines)


def export_dot(model: Model, scope_id: str | None = None) -> str:
    """Graphviz digraph of the scope: expressions as boxes, elements as
    ellipses, one labeled edge per stored or synthesized containment link."""
    from .trace import all_links

    scoped = {e.id for e in model.scope_expressions(scope_id)}
    shown: set[str] = set(scoped)
    edges: list[tuple[str, str, str]] = []
    for link in all_links(model):
        if link.source_id in scoped or link.target_id in scoped:
            edges.append((link.source_id, link.target_id, link.kind.value))
            shown.add(link.source_id)
            shown.add(link.target_id)

    lines = ["digraph requirements {", "    rankdir=LR;"]
    for node_id in sorted(shown):
        if model.has_element(node_id):
            shape = "ellipse"
            label = f"{node_id}\\n{model.element(node_id).name}"
        elif model.has_expression(node_id):
            shape = "box"
            label = node_id
        else:
            shape = "diamond"
            label = node_id
        lines.append(f'    "{node_id}" [shape={shape}, label="{label}"];')
    for source, target, kind in sorted(edges):
        lines.append(f'    "{source}" -> "{target}" [label="{kind}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


REPORT_TEMPLATES = ("Overview", "SetReview")


def generate_report(model: Model, scope_id: str | None, template: str) -> str:
    if template == "Overview":
        return _overview_report(model, scope_id)
    if template == "SetReview":
        return _set_review_report(model, scope_id)
    raise InvariantViolationError(
        f"unknown report template {template!r}; expected one of {REPORT_TEMPLATES}")
