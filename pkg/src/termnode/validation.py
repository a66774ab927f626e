"""Machine-readability validation of term entries.

The rule catalog is fixed: codes are stable tokens that importers, the API,
and the UI can match on. Errors block publication; warnings do not.
"""

from __future__ import annotations

import re
from urllib.parse import urlparse

from .model import (
    Currentness,
    GrammaticalGender,
    GrammaticalNumber,
    MediaKind,
    PartOfSpeech,
    Register,
    Severity,
    TermEntry,
    TermType,
    ValidationIssue,
    canonical_lang,
    is_uuid,
    is_valid_lang,
)

# Catalog rules checked by validate_entry.
EMPTY_TERM = "EMPTY_TERM"
INVALID_LANG = "INVALID_LANG"
DUPLICATE_LANG_SECTION = "DUPLICATE_LANG_SECTION"
NO_LANG_SECTION = "NO_LANG_SECTION"
MARKUP_IN_TERM = "MARKUP_IN_TERM"
MULTILINE_TERM = "MULTILINE_TERM"
BAD_MEDIA_URL = "BAD_MEDIA_URL"
EMPTY_DEFINITION_PRESENT = "EMPTY_DEFINITION_PRESENT"
# Structural codes used by validate_entry beyond the core catalog.
EMPTY_LANG_SECTION = "EMPTY_LANG_SECTION"
INVALID_VALUE = "INVALID_VALUE"
CONTROL_CHARS = "CONTROL_CHARS"
# Codes emitted only by the codecs while parsing.
UNKNOWN_CATEGORY = "UNKNOWN_CATEGORY"
MISSING_ID = "MISSING_ID"
UNKNOWN_COLUMN = "UNKNOWN_COLUMN"
ORPHAN_DEFINITION = "ORPHAN_DEFINITION"

_ENUM_FIELDS = (
    ("term_type", TermType, False),
    ("part_of_speech", PartOfSpeech, True),
    ("grammatical_gender", GrammaticalGender, True),
    ("grammatical_number", GrammaticalNumber, True),
    ("register", Register, True),
    ("currentness", Currentness, True),
)


def _error(code: str, path: str, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.ERROR, code, path, message)


def _warning(code: str, path: str, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.WARNING, code, path, message)


def has_markup(text: str) -> bool:
    return "<" in text or ">" in text or "&lt;" in text


# XML 1.0 cannot represent C0 controls other than tab/newline/return, so
# entries carrying them would not survive interchange.
_CONTROL = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f]")


def has_forbidden_controls(text: str) -> bool:
    return bool(_CONTROL.search(text))


def is_acceptable_media_url(url: str) -> bool:
    try:
        parsed = urlparse(url)
    except ValueError:
        return False
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def validate_entry(entry: TermEntry) -> list[ValidationIssue]:
    """Return every triggered rule; an empty list means publishable quality.

    Accepts arbitrary candidate entries, including invariant-violating
    ones; problems are reported, never raised.
    """
    issues: list[ValidationIssue] = []
    base = f"entry/{entry.id}"

    if not is_uuid(entry.id):
        issues.append(_error(INVALID_VALUE, base, f"entry id is not a UUID: {entry.id!r}"))
    if not isinstance(entry.revision, int) or entry.revision < 0:
        issues.append(_error(INVALID_VALUE, base, f"revision must be a non-negative integer: {entry.revision!r}"))

    if entry.definition is not None and not entry.definition.strip():
        issues.append(_warning(EMPTY_DEFINITION_PRESENT, f"{base}/definition", "definition present but blank"))

    seen_fields: set[str] = set()
    for label in entry.subject_fields:
        if not label.strip():
            issues.append(_error(INVALID_VALUE, f"{base}/subject_field", "blank subject field label"))
        elif label in seen_fields:
            issues.append(_error(INVALID_VALUE, f"{base}/subject_field", f"duplicate subject field {label!r}"))
        else:
            seen_fields.add(label)

    if not entry.lang_sections:
        issues.append(_error(NO_LANG_SECTION, base, "entry has no language sections"))

    seen_langs: set[str] = set()
    for sec in entry.lang_sections:
        lang = canonical_lang(sec.lang or "")
        sec_path = f"{base}/lang/{lang or sec.lang}"
        if not is_valid_lang(sec.lang or ""):
            issues.append(_error(INVALID_LANG, sec_path, f"invalid language code: {sec.lang!r}"))
        elif lang in seen_langs:
            issues.append(_error(DUPLICATE_LANG_SECTION, sec_path, f"duplicate section for language {lang!r}"))
        else:
            seen_langs.add(lang)

        if sec.definition is not None and not sec.definition.strip():
            issues.append(
                _warning(EMPTY_DEFINITION_PRESENT, f"{sec_path}/definition", "definition present but blank")
            )

        if not sec.terms:
            issues.append(_error(EMPTY_LANG_SECTION, sec_path, "language section has no terms"))
        for idx, rec in enumerate(sec.terms):
            term_path = f"{sec_path}/term/{idx}"
            term = rec.term if isinstance(rec.term, str) else ""
            if not term.strip():
                issues.append(_error(EMPTY_TERM, term_path, "term is empty"))
            else:
                if "\n" in term or "\r" in term:
                    issues.append(_error(MULTILINE_TERM, term_path, "term contains line breaks"))
                if has_markup(term):
                    issues.append(_warning(MARKUP_IN_TERM, term_path, f"term contains markup: {term!r}"))
            for name, enum_cls, optional in _ENUM_FIELDS:
                value = getattr(rec, name)
                if value is None and optional:
                    continue
                if not isinstance(value, enum_cls):
                    issues.append(
                        _error(INVALID_VALUE, f"{term_path}/{name}", f"{name} holds an unlisted value: {value!r}")
                    )

    for idx, media in enumerate(entry.media):
        media_path = f"{base}/media/{idx}"
        if not isinstance(media.kind, MediaKind):
            issues.append(_error(INVALID_VALUE, f"{media_path}/kind", f"unknown media kind: {media.kind!r}"))
        if not is_acceptable_media_url(media.url):
            issues.append(_warning(BAD_MEDIA_URL, media_path, f"not an absolute http(s) URL: {media.url!r}"))

    for path, text in _text_fields(entry):
        if isinstance(text, str) and has_forbidden_controls(text):
            issues.append(_error(CONTROL_CHARS, path, "text contains control characters"))

    return issues


def _text_fields(entry: TermEntry):
    base = f"entry/{entry.id}"
    yield f"{base}/definition", entry.definition
    yield f"{base}/modified_by", entry.modified_by
    for label in entry.subject_fields:
        yield f"{base}/subject_field", label
    for sec in entry.lang_sections:
        sec_path = f"{base}/lang/{sec.lang}"
        yield f"{sec_path}/definition", sec.definition
        for idx, rec in enumerate(sec.terms):
            term_path = f"{sec_path}/term/{idx}"
            yield term_path, rec.term
            yield f"{term_path}/usage_example", rec.usage_example
            yield f"{term_path}/source", rec.source
    for idx, media in enumerate(entry.media):
        yield f"{base}/media/{idx}/url", media.url
        yield f"{base}/media/{idx}/caption", media.caption
    for idx, extra in enumerate(entry.extras):
        yield f"{base}/extra/{idx}", extra.value


def has_errors(issues: list[ValidationIssue]) -> bool:
    return any(issue.severity is Severity.ERROR for issue in issues)
