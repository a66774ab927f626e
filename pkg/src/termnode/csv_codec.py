"""Wide-format CSV codec: one row per concept entry.

Header tokens: ``id``, ``subject_field``, ``definition`` plus per-language
``term:<lang>``, ``definition:<lang>``, ``pos:<lang>``. Multiple values in
one cell are joined with ``|`` (escaped as ``\\|``, backslash as ``\\\\``);
``pos`` cells align with the term cells by position. RFC 4180 quoting,
UTF-8. Fields a spreadsheet cannot carry (media, workflow status,
revision) default to empty/draft/0 on parse; they are never invented.
"""

from __future__ import annotations

import csv
import io
from typing import Optional

from . import validation
from .errors import EncodingError, HeaderError, InvariantViolation, RowArityError
from .model import (
    LangSection,
    PartOfSpeech,
    Severity,
    TermEntry,
    TermRecord,
    ValidationIssue,
    canonical_lang,
    is_uuid,
    new_id,
    nfc,
)


def escape_cell_token(value: str) -> str:
    return value.replace("\\", "\\\\").replace("|", "\\|")


def join_tokens(values: list[str]) -> str:
    return "|".join(escape_cell_token(v) for v in values)


def split_tokens(cell: str) -> list[str]:
    """Split on unescaped ``|``; empty cell means no values."""
    if cell == "":
        return []
    parts: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(cell):
        ch = cell[i]
        if ch == "\\" and i + 1 < len(cell) and cell[i + 1] in "\\|":
            buf.append(cell[i + 1])
            i += 2
        elif ch == "|":
            parts.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(ch)
            i += 1
    parts.append("".join(buf))
    return parts


def _warning(code: str, path: str, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.WARNING, code, path, message)


class _Header:
    def __init__(self) -> None:
        self.id_col: Optional[int] = None
        self.subject_col: Optional[int] = None
        self.definition_col: Optional[int] = None
        self.term_cols: dict[str, int] = {}
        self.lang_def_cols: dict[str, int] = {}
        self.pos_cols: dict[str, int] = {}
        self.width = 0


def _parse_header(row: list[str], issues: list[ValidationIssue]) -> _Header:
    header = _Header()
    header.width = len(row)
    taken: set[str] = set()
    for col, raw in enumerate(row):
        token = nfc(raw).strip()
        key = token.lower()
        if key in taken:
            issues.append(_warning(validation.UNKNOWN_COLUMN, "header", f"duplicate column {token!r} ignored"))
            continue
        if key == "id":
            header.id_col = col
        elif key == "subject_field":
            header.subject_col = col
        elif key == "definition":
            header.definition_col = col
        elif key.startswith("term:"):
            header.term_cols[canonical_lang(key[5:])] = col
        elif key.startswith("definition:"):
            header.lang_def_cols[canonical_lang(key[11:])] = col
        elif key.startswith("pos:"):
            header.pos_cols[canonical_lang(key[4:])] = col
        else:
            issues.append(_warning(validation.UNKNOWN_COLUMN, "header", f"unrecognized column {token!r} ignored"))
            continue
        taken.add(key)
    if not header.term_cols:
        raise HeaderError("no term:<lang> column in header")
    return header


def _parse_pos(token: str, path: str, issues: list[ValidationIssue]) -> Optional[PartOfSpeech]:
    if not token:
        return None
    try:
        return PartOfSpeech(token.strip().lower())
    except ValueError:
        issues.append(_warning(validation.INVALID_VALUE, path, f"unknown part of speech {token!r}"))
        return None


def parse_csv(document: bytes) -> tuple[list[TermEntry], list[ValidationIssue]]:
    """One entry per data row; the first row must be a header."""
    try:
        text = document.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"document is not valid UTF-8: {exc}") from None
    rows = list(csv.reader(io.StringIO(text, newline="")))
    rows = [row for row in rows if row]
    if not rows:
        return [], []
    issues: list[ValidationIssue] = []
    header = _parse_header(rows[0], issues)

    entries: list[TermEntry] = []
    for row_no, row in enumerate(rows[1:], start=2):
        if len(row) != header.width:
            raise RowArityError(f"row {row_no} has {len(row)} cells, header has {header.width}")
        cell = lambda col: nfc(row[col]) if col is not None else ""

        entry_id = cell(header.id_col).strip()
        if not entry_id:
            entry_id = new_id()
        elif not is_uuid(entry_id):
            issues.append(
                _warning(validation.MISSING_ID, f"row/{row_no}", f"id {entry_id!r} is not a UUID; generated fresh")
            )
            entry_id = new_id()

        entry = TermEntry(id=entry_id)
        for label in split_tokens(cell(header.subject_col)):
            if label and label not in entry.subject_fields:
                entry.subject_fields.append(label)
        concept_def = cell(header.definition_col)
        entry.definition = concept_def if concept_def else None

        langs = sorted(set(header.term_cols) | set(header.lang_def_cols))
        for lang in langs:
            terms = split_tokens(cell(header.term_cols.get(lang)))
            lang_def = cell(header.lang_def_cols.get(lang))
            if not terms:
                if lang_def:
                    issues.append(
                        _warning(
                            validation.ORPHAN_DEFINITION,
                            f"row/{row_no}/lang/{lang}",
                            f"definition without any term in {lang!r} dropped",
                        )
                    )
                continue
            pos_tokens = split_tokens(cell(header.pos_cols.get(lang)))
            records = []
            for idx, term in enumerate(terms):
                pos = pos_tokens[idx] if idx < len(pos_tokens) else ""
                records.append(
                    TermRecord(
                        term=term,
                        part_of_speech=_parse_pos(pos, f"row/{row_no}/lang/{lang}/term/{idx}", issues),
                    )
                )
            entry.lang_sections.append(
                LangSection(lang=lang, definition=lang_def if lang_def else None, terms=records)
            )
        entries.append(entry)
    return entries, issues


def serialize_csv(entries: list[TermEntry], languages: list[str]) -> bytes:
    """Deterministic wide-format export restricted to the given languages."""
    if not languages:
        raise InvariantViolation("languages must be non-empty")
    langs = [canonical_lang(lang) for lang in languages]

    header = ["id", "subject_field", "definition"]
    for lang in langs:
        header.extend([f"term:{lang}", f"definition:{lang}", f"pos:{lang}"])

    out = io.StringIO(newline="")
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(header)
    for entry in entries:
        row = [entry.id, join_tokens(entry.subject_fields), entry.definition or ""]
        for lang in langs:
            sec = entry.section(lang)
            if sec is None:
                row.extend(["", "", ""])
                continue
            row.append(join_tokens([rec.term for rec in sec.terms]))
            row.append(sec.definition or "")
            pos_tokens = [rec.part_of_speech.value if rec.part_of_speech else "" for rec in sec.terms]
            row.append(join_tokens(pos_tokens) if any(pos_tokens) else "")
        writer.writerow(row)
    return out.getvalue().encode("utf-8")
