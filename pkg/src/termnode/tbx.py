"""Termbase exchange codec (TBX-ETB dialect).

One pinned XML dialect so that independently operated nodes interchange
collections bit-exactly. Serialization is deterministic: fixed element
and attribute order, two-space indentation, UTF-8 with XML declaration.
Unknown data categories survive the round trip as opaque extras.

Document shape::

    <tbx type="TBX-ETB" xml:lang="en">
      <tbxHeader>
        <fileDesc>
          <titleStmt id="{collection-uuid}"><title>{name}</title></titleStmt>
          <sourceDesc>
            <p type="description">...</p>
            <p type="subjectField">...</p>   <!-- one per domain -->
            <p type="language">...</p>       <!-- one per declared language -->
          </sourceDesc>
        </fileDesc>
      </tbxHeader>
      <text><body>{conceptEntry*}</body></text>
    </tbx>

Per concept: subjectField/definition descrips, xGraphic/xVideo xrefs,
elementWorkingStatus/revision/modificationDate/responsibility admins,
then one langSec per language holding termSec elements with term,
termNote (termType, partOfSpeech, grammaticalGender, grammaticalNumber,
register, currentness), context descrip, and source admin.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Optional

from . import validation
from .errors import EncodingError, InvariantViolation, MalformedDocument, UnsupportedDialect
from .model import (
    CollectionMeta,
    Currentness,
    ExtraField,
    GrammaticalGender,
    GrammaticalNumber,
    LangSection,
    MediaKind,
    MediaRef,
    PartOfSpeech,
    Register,
    Severity,
    TermEntry,
    TermRecord,
    TermType,
    ValidationIssue,
    WorkflowStatus,
    canonical_lang,
    from_camel,
    is_uuid,
    new_id,
    nfc,
    to_camel,
)

XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"
DIALECT = "TBX-ETB"

STATUS_TOKENS = {
    WorkflowStatus.DRAFT: "workingElement",
    WorkflowStatus.APPROVED: "consolidatedElement",
}
_STATUS_FROM_TOKEN = {v: k for k, v in STATUS_TOKENS.items()}

_TERM_NOTE_FIELDS = {
    "termType": ("term_type", TermType),
    "partOfSpeech": ("part_of_speech", PartOfSpeech),
    "grammaticalGender": ("grammatical_gender", GrammaticalGender),
    "grammaticalNumber": ("grammatical_number", GrammaticalNumber),
    "register": ("register", Register),
    "currentness": ("currentness", Currentness),
}

_CONCEPT_DESCRIP_TYPES = {"subjectField", "definition"}
_CONCEPT_ADMIN_TYPES = {"elementWorkingStatus", "revision", "modificationDate", "responsibility"}
_CONCEPT_XREF_TYPES = {"xGraphic", "xVideo"}


def _esc_text(value: str) -> str:
    value = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    # Bare carriage returns would be normalized away by any XML parser.
    return value.replace("\r", "&#13;")


def _esc_attr(value: str) -> str:
    value = _esc_text(value).replace('"', "&quot;")
    return value.replace("\n", "&#10;").replace("\t", "&#9;")


def _check_serializable(entry: TermEntry) -> None:
    issues = validation.validate_entry(entry)
    errors = [i for i in issues if i.severity is Severity.ERROR]
    if errors:
        raise InvariantViolation(
            "entry %s violates invariants: %s" % (entry.id, ", ".join(i.code for i in errors))
        )
    for extra in entry.extras:
        if extra.elem == "descrip" and extra.type in _CONCEPT_DESCRIP_TYPES:
            raise InvariantViolation(f"extra shadows known category descrip/{extra.type}")
        if extra.elem == "admin" and extra.type in _CONCEPT_ADMIN_TYPES:
            raise InvariantViolation(f"extra shadows known category admin/{extra.type}")
        if extra.elem == "xref" and extra.type in _CONCEPT_XREF_TYPES:
            raise InvariantViolation(f"extra shadows known category xref/{extra.type}")


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def line(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def leaf(self, depth: int, tag: str, attrs: list[tuple[str, str]], text: Optional[str]) -> None:
        rendered = "".join(f' {name}="{_esc_attr(value)}"' for name, value in attrs)
        if text is None or text == "":
            self.line(depth, f"<{tag}{rendered}/>")
        else:
            self.line(depth, f"<{tag}{rendered}>{_esc_text(text)}</{tag}>")

    def bytes(self) -> bytes:
        return ("\n".join(self.lines) + "\n").encode("utf-8")


def _write_term(w: _Writer, depth: int, rec: TermRecord) -> None:
    w.line(depth, "<termSec>")
    w.leaf(depth + 1, "term", [], rec.term)
    w.leaf(depth + 1, "termNote", [("type", "termType")], to_camel(rec.term_type.value))
    for note_type, (field_name, _) in _TERM_NOTE_FIELDS.items():
        if note_type == "termType":
            continue
        value = getattr(rec, field_name)
        if value is not None:
            w.leaf(depth + 1, "termNote", [("type", note_type)], to_camel(value.value))
    if rec.usage_example:
        w.leaf(depth + 1, "descrip", [("type", "context")], rec.usage_example)
    if rec.source:
        w.leaf(depth + 1, "admin", [("type", "source")], rec.source)
    w.line(depth, "</termSec>")


def _write_entry(w: _Writer, depth: int, entry: TermEntry) -> None:
    w.line(depth, f'<conceptEntry id="{_esc_attr(entry.id)}">')
    for label in entry.subject_fields:
        w.leaf(depth + 1, "descrip", [("type", "subjectField")], label)
    if entry.definition:
        w.leaf(depth + 1, "descrip", [("type", "definition")], entry.definition)
    for media in entry.media:
        xref_type = "xGraphic" if media.kind is MediaKind.IMAGE else "xVideo"
        w.leaf(depth + 1, "xref", [("type", xref_type), ("target", media.url)], media.caption)
    w.leaf(depth + 1, "admin", [("type", "elementWorkingStatus")], STATUS_TOKENS[entry.workflow_status])
    w.leaf(depth + 1, "admin", [("type", "revision")], str(entry.revision))
    w.leaf(depth + 1, "admin", [("type", "modificationDate")], entry.modified_at)
    if entry.modified_by:
        w.leaf(depth + 1, "admin", [("type", "responsibility")], entry.modified_by)
    for extra in entry.extras:
        attrs = [("type", extra.type)] if extra.type else []
        if extra.target is not None:
            attrs.append(("target", extra.target))
        w.leaf(depth + 1, extra.elem, attrs, extra.value)
    for sec in entry.lang_sections:
        w.line(depth + 1, f'<langSec xml:lang="{_esc_attr(sec.lang)}">')
        if sec.definition:
            w.leaf(depth + 2, "descrip", [("type", "definition")], sec.definition)
        for rec in sec.terms:
            _write_term(w, depth + 2, rec)
        w.line(depth + 1, "</langSec>")
    w.line(depth, "</conceptEntry>")


def serialize_tbx(meta: CollectionMeta, entries: list[TermEntry]) -> bytes:
    """Render a full document; identical input yields byte-identical output."""
    if not meta.name:
        raise InvariantViolation("collection name must be non-empty")
    for entry in entries:
        _check_serializable(entry)

    w = _Writer()
    w.line(0, '<?xml version="1.0" encoding="UTF-8"?>')
    w.line(0, f'<tbx type="{DIALECT}" xml:lang="en">')
    w.line(1, "<tbxHeader>")
    w.line(2, "<fileDesc>")
    w.line(3, f'<titleStmt id="{_esc_attr(meta.id)}">')
    w.leaf(4, "title", [], meta.name)
    w.line(3, "</titleStmt>")
    source_bits = []
    if meta.description:
        source_bits.append(("description", meta.description))
    source_bits.extend(("subjectField", d) for d in meta.domains)
    source_bits.extend(("language", lang) for lang in meta.declared_languages)
    if source_bits:
        w.line(3, "<sourceDesc>")
        for p_type, value in source_bits:
            w.leaf(4, "p", [("type", p_type)], value)
        w.line(3, "</sourceDesc>")
    w.line(2, "</fileDesc>")
    w.line(1, "</tbxHeader>")
    w.line(1, "<text>")
    if entries:
        w.line(2, "<body>")
        for entry in entries:
            _write_entry(w, 3, entry)
        w.line(2, "</body>")
    else:
        w.line(2, "<body/>")
    w.line(1, "</text>")
    w.line(0, "</tbx>")
    return w.bytes()


def serialize_entry_fragment(entry: TermEntry) -> bytes:
    """Standalone conceptEntry element, as carried in sync batch payloads."""
    _check_serializable(entry)
    w = _Writer()
    _write_entry(w, 0, entry)
    return w.bytes()


def _text_of(elem: ET.Element) -> str:
    return nfc(elem.text or "")


def _opt_text(elem: ET.Element) -> Optional[str]:
    text = _text_of(elem)
    return text if text else None


class _EntryReader:
    """Collects one conceptEntry, routing unknown categories into extras."""

    def __init__(self, issues: list[ValidationIssue]) -> None:
        self.issues = issues

    def warn(self, code: str, path: str, message: str) -> None:
        self.issues.append(ValidationIssue(Severity.WARNING, code, path, message))

    def read(self, elem: ET.Element, position: int) -> TermEntry:
        entry_id = elem.get("id", "")
        path = f"entry/{entry_id or position}"
        if not is_uuid(entry_id):
            self.warn(validation.MISSING_ID, path, f"concept entry without usable id: {entry_id!r}")
            entry_id = new_id()
        entry = TermEntry(id=entry_id)
        seen_definition = False
        for child in elem:
            tag = child.tag
            ctype = child.get("type", "")
            if tag == "descrip" and ctype == "subjectField":
                label = _text_of(child)
                if label and label not in entry.subject_fields:
                    entry.subject_fields.append(label)
            elif tag == "descrip" and ctype == "definition":
                if seen_definition:
                    self.warn(validation.INVALID_VALUE, path, "duplicate concept definition ignored")
                else:
                    entry.definition = _opt_text(child)
                    seen_definition = True
            elif tag == "xref" and ctype in _CONCEPT_XREF_TYPES:
                kind = MediaKind.IMAGE if ctype == "xGraphic" else MediaKind.VIDEO
                entry.media.append(
                    MediaRef(url=nfc(child.get("target", "")), kind=kind, caption=_opt_text(child))
                )
            elif tag == "admin" and ctype == "elementWorkingStatus":
                token = _text_of(child)
                if token in _STATUS_FROM_TOKEN:
                    entry.workflow_status = _STATUS_FROM_TOKEN[token]
                else:
                    self.warn(validation.INVALID_VALUE, path, f"unknown working status {token!r}")
            elif tag == "admin" and ctype == "revision":
                try:
                    entry.revision = int(_text_of(child))
                except ValueError:
                    self.warn(validation.INVALID_VALUE, path, f"unreadable revision {child.text!r}")
            elif tag == "admin" and ctype == "modificationDate":
                entry.modified_at = _text_of(child)
            elif tag == "admin" and ctype == "responsibility":
                entry.modified_by = _text_of(child)
            elif tag == "langSec":
                entry.lang_sections.append(self._read_lang_sec(child, entry, path))
            else:
                self._keep_extra(entry, child, path)
        return entry

    def _keep_extra(self, entry: TermEntry, child: ET.Element, path: str) -> None:
        ctype = child.get("type", "")
        entry.extras.append(
            ExtraField(
                elem=child.tag,
                type=nfc(ctype),
                value=_text_of(child),
                target=nfc(child.get("target")) if child.get("target") is not None else None,
            )
        )
        self.warn(
            validation.UNKNOWN_CATEGORY,
            path,
            f"unknown data category {child.tag}/{ctype or '?'} preserved verbatim",
        )

    def _read_lang_sec(self, elem: ET.Element, entry: TermEntry, path: str) -> LangSection:
        lang = canonical_lang(elem.get(XML_LANG, ""))
        sec = LangSection(lang=lang, terms=[])
        sec_path = f"{path}/lang/{lang or '?'}"
        for child in elem:
            if child.tag == "descrip" and child.get("type") == "definition":
                sec.definition = _opt_text(child)
            elif child.tag == "termSec":
                sec.terms.append(self._read_term_sec(child, entry, sec_path))
            else:
                self._keep_extra(entry, child, sec_path)
        return sec

    def _read_term_sec(self, elem: ET.Element, entry: TermEntry, sec_path: str) -> TermRecord:
        rec = TermRecord(term="")
        for child in elem:
            ctype = child.get("type", "")
            if child.tag == "term":
                rec.term = _text_of(child)
            elif child.tag == "termNote" and ctype in _TERM_NOTE_FIELDS:
                field_name, enum_cls = _TERM_NOTE_FIELDS[ctype]
                token = from_camel(_text_of(child))
                try:
                    setattr(rec, field_name, enum_cls(token))
                except ValueError:
                    self.warn(
                        validation.INVALID_VALUE,
                        f"{sec_path}/term",
                        f"unknown {ctype} value {child.text!r}",
                    )
            elif child.tag == "descrip" and ctype == "context":
                rec.usage_example = _opt_text(child)
            elif child.tag == "admin" and ctype == "source":
                rec.source = _opt_text(child)
            else:
                self._keep_extra(entry, child, sec_path)
        return rec


def _parse_root(document: bytes) -> ET.Element:
    try:
        document.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"document is not valid UTF-8: {exc}") from None
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedDocument(f"not well-formed XML: {exc}") from None
    return root


def _parse_header(root: ET.Element, issues: list[ValidationIssue]) -> CollectionMeta:
    file_desc = root.find("tbxHeader/fileDesc")
    if file_desc is None:
        raise UnsupportedDialect("missing tbxHeader/fileDesc")
    title_stmt = file_desc.find("titleStmt")
    title = None if title_stmt is None else title_stmt.find("title")
    if title_stmt is None or title is None:
        raise UnsupportedDialect("missing titleStmt/title")
    meta_id = title_stmt.get("id", "")
    if not is_uuid(meta_id):
        issues.append(
            ValidationIssue(Severity.WARNING, validation.MISSING_ID, "header", "collection id missing; generated")
        )
        meta_id = new_id()
    meta = CollectionMeta(id=meta_id, name=_text_of(title))
    source_desc = file_desc.find("sourceDesc")
    if source_desc is not None:
        for p in source_desc.findall("p"):
            p_type = p.get("type", "")
            if p_type == "description":
                meta.description = _opt_text(p)
            elif p_type == "subjectField":
                label = _text_of(p)
                if label and label not in meta.domains:
                    meta.domains.append(label)
            elif p_type == "language":
                meta.declared_languages.append(canonical_lang(_text_of(p)))
            else:
                issues.append(
                    ValidationIssue(
                        Severity.WARNING, validation.UNKNOWN_CATEGORY, "header", f"unknown header field {p_type!r}"
                    )
                )
    return meta


def parse_tbx(document: bytes) -> tuple[CollectionMeta, list[TermEntry], list[ValidationIssue]]:
    """Read a full document back into (meta, entries, issues).

    Recoverable problems become issues; structural failures raise.
    """
    root = _parse_root(document)
    if root.tag != "tbx":
        raise UnsupportedDialect(f"root element is <{root.tag}>, expected <tbx>")
    if root.get("type") != DIALECT:
        raise UnsupportedDialect(f"dialect {root.get('type')!r} is not supported")
    issues: list[ValidationIssue] = []
    meta = _parse_header(root, issues)
    body = root.find("text/body")
    if body is None:
        raise UnsupportedDialect("missing text/body")
    reader = _EntryReader(issues)
    entries = []
    for position, elem in enumerate(body):
        if elem.tag != "conceptEntry":
            issues.append(
                ValidationIssue(
                    Severity.WARNING, validation.UNKNOWN_CATEGORY, f"body/{position}",
                    f"unexpected element <{elem.tag}> in body skipped",
                )
            )
            continue
        entries.append(reader.read(elem, position))
    return meta, entries, issues


def parse_entry_fragment(payload: bytes) -> TermEntry:
    """Inverse of serialize_entry_fragment; raises on malformed payloads."""
    root = _parse_root(payload)
    if root.tag != "conceptEntry":
        raise UnsupportedDialect(f"fragment root is <{root.tag}>, expected <conceptEntry>")
    issues: list[ValidationIssue] = []
    return _EntryReader(issues).read(root, 0)
