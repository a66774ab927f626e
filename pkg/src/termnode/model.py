"""Concept-oriented terminology data model.

A term entry is one concept with all its designations across languages.
Entries live in collections; collections belong to a group and carry a
visibility level that drives publication and synchronisation.
"""

from __future__ import annotations

import re
import unicodedata
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Optional


LANG_PATTERN = re.compile(r"^[a-z]{2,3}(-[a-z0-9]{2,4})?$")

# Unix epoch in the canonical timestamp format; default for data parsed
# from formats that cannot carry timestamps (CSV).
EPOCH_TS = "1970-01-01T00:00:00.000Z"


def canonical_lang(code: str) -> str:
    """Lowercase a language code; comparison is always case-insensitive."""
    return code.strip().lower()


def is_valid_lang(code: str) -> bool:
    return bool(LANG_PATTERN.match(canonical_lang(code)))


def format_timestamp(dt: datetime) -> str:
    """RFC 3339 UTC with millisecond precision; lexicographically ordered."""
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def parse_timestamp(value: str) -> datetime:
    return datetime.strptime(value, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)


def now_timestamp() -> str:
    return format_timestamp(datetime.now(timezone.utc))


def new_id() -> str:
    return str(uuid.uuid4())


def is_uuid(value: str) -> bool:
    try:
        uuid.UUID(value)
    except (ValueError, AttributeError, TypeError):
        return False
    return True


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


class TermType(Enum):
    FULL_FORM = "full_form"
    ABBREVIATION = "abbreviation"
    ACRONYM = "acronym"
    SHORT_FORM = "short_form"
    VARIANT = "variant"
    PHRASE = "phrase"


class PartOfSpeech(Enum):
    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"
    ADVERB = "adverb"
    PROPER_NOUN = "proper_noun"
    OTHER = "other"


class GrammaticalGender(Enum):
    MASCULINE = "masculine"
    FEMININE = "feminine"
    NEUTER = "neuter"
    COMMON = "common"


class GrammaticalNumber(Enum):
    SINGULAR = "singular"
    PLURAL = "plural"
    DUAL = "dual"


class Register(Enum):
    NEUTRAL = "neutral"
    TECHNICAL = "technical"
    COLLOQUIAL = "colloquial"
    LEGAL = "legal"


class Currentness(Enum):
    CURRENT = "current"
    OUTDATED = "outdated"
    SUPERSEDED = "superseded"


class WorkflowStatus(Enum):
    DRAFT = "draft"
    APPROVED = "approved"


class MediaKind(Enum):
    IMAGE = "image"
    VIDEO = "video"


class Visibility(Enum):
    PRIVATE = "private"
    GROUP = "group"
    PUBLIC = "public"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


def to_camel(token: str) -> str:
    """snake_case enum token to the lowerCamelCase spelling used on the wire."""
    head, *rest = token.split("_")
    return head + "".join(part.capitalize() for part in rest)


def from_camel(token: str) -> str:
    return re.sub(r"([A-Z])", lambda m: "_" + m.group(1).lower(), token)


@dataclass
class TermRecord:
    """One designation of the concept in one language."""

    term: str
    term_type: TermType = TermType.FULL_FORM
    part_of_speech: Optional[PartOfSpeech] = None
    grammatical_gender: Optional[GrammaticalGender] = None
    grammatical_number: Optional[GrammaticalNumber] = None
    register: Optional[Register] = None
    currentness: Optional[Currentness] = None
    usage_example: Optional[str] = None
    source: Optional[str] = None


@dataclass
class LangSection:
    lang: str
    definition: Optional[str] = None
    terms: list[TermRecord] = field(default_factory=list)


@dataclass
class MediaRef:
    url: str
    kind: MediaKind = MediaKind.IMAGE
    caption: Optional[str] = None


@dataclass
class ExtraField:
    """Unknown data category preserved verbatim so interchange stays lossless."""

    elem: str
    type: str
    value: str
    target: Optional[str] = None


@dataclass
class TermEntry:
    id: str = field(default_factory=new_id)
    subject_fields: list[str] = field(default_factory=list)
    definition: Optional[str] = None
    lang_sections: list[LangSection] = field(default_factory=list)
    media: list[MediaRef] = field(default_factory=list)
    workflow_status: WorkflowStatus = WorkflowStatus.DRAFT
    revision: int = 0
    modified_at: str = EPOCH_TS
    modified_by: str = ""
    extras: list[ExtraField] = field(default_factory=list)

    def languages(self) -> list[str]:
        return [section.lang for section in self.lang_sections]

    def section(self, lang: str) -> Optional[LangSection]:
        code = canonical_lang(lang)
        for sec in self.lang_sections:
            if canonical_lang(sec.lang) == code:
                return sec
        return None


@dataclass
class CollectionMeta:
    id: str = field(default_factory=new_id)
    name: str = ""
    description: Optional[str] = None
    domains: list[str] = field(default_factory=list)
    declared_languages: list[str] = field(default_factory=list)


@dataclass
class ValidationIssue:
    severity: Severity
    code: str
    path: str
    message: str

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "path": self.path,
            "message": self.message,
        }


def _enum_or_none(enum_cls, value):
    if value is None:
        return None
    return enum_cls(value)


def term_record_to_dict(rec: TermRecord) -> dict:
    return {
        "term": rec.term,
        "term_type": rec.term_type.value if isinstance(rec.term_type, TermType) else rec.term_type,
        "part_of_speech": rec.part_of_speech.value if rec.part_of_speech else None,
        "grammatical_gender": rec.grammatical_gender.value if rec.grammatical_gender else None,
        "grammatical_number": rec.grammatical_number.value if rec.grammatical_number else None,
        "register": rec.register.value if rec.register else None,
        "currentness": rec.currentness.value if rec.currentness else None,
        "usage_example": rec.usage_example,
        "source": rec.source,
    }


def term_record_from_dict(data: dict) -> TermRecord:
    return TermRecord(
        term=data["term"],
        term_type=TermType(data.get("term_type", "full_form")),
        part_of_speech=_enum_or_none(PartOfSpeech, data.get("part_of_speech")),
        grammatical_gender=_enum_or_none(GrammaticalGender, data.get("grammatical_gender")),
        grammatical_number=_enum_or_none(GrammaticalNumber, data.get("grammatical_number")),
        register=_enum_or_none(Register, data.get("register")),
        currentness=_enum_or_none(Currentness, data.get("currentness")),
        usage_example=data.get("usage_example"),
        source=data.get("source"),
    )


def entry_to_dict(entry: TermEntry) -> dict:
    return {
        "id": entry.id,
        "subject_fields": list(entry.subject_fields),
        "definition": entry.definition,
        "lang_sections": [
            {
                "lang": sec.lang,
                "definition": sec.definition,
                "terms": [term_record_to_dict(t) for t in sec.terms],
            }
            for sec in entry.lang_sections
        ],
        "media": [
            {"url": m.url, "kind": m.kind.value if isinstance(m.kind, MediaKind) else m.kind, "caption": m.caption}
            for m in entry.media
        ],
        "workflow_status": entry.workflow_status.value
        if isinstance(entry.workflow_status, WorkflowStatus)
        else entry.workflow_status,
        "revision": entry.revision,
        "modified_at": entry.modified_at,
        "modified_by": entry.modified_by,
        "extras": [
            {"elem": x.elem, "type": x.type, "value": x.value, "target": x.target}
            for x in entry.extras
        ],
    }


def entry_from_dict(data: dict) -> TermEntry:
    """Strict inverse of entry_to_dict; raises ValueError/KeyError on bad shapes."""
    return TermEntry(
        id=data.get("id") or new_id(),
        subject_fields=list(data.get("subject_fields", [])),
        definition=data.get("definition"),
        lang_sections=[
            LangSection(
                lang=sec["lang"],
                definition=sec.get("definition"),
                terms=[term_record_from_dict(t) for t in sec.get("terms", [])],
            )
            for sec in data.get("lang_sections", [])
        ],
        media=[
            MediaRef(url=m["url"], kind=MediaKind(m.get("kind", "image")), caption=m.get("caption"))
            for m in data.get("media", [])
        ],
        workflow_status=WorkflowStatus(data.get("workflow_status", "draft")),
        revision=int(data.get("revision", 0)),
        modified_at=data.get("modified_at", EPOCH_TS),
        modified_by=data.get("modified_by", ""),
        extras=[
            ExtraField(elem=x["elem"], type=x["type"], value=x["value"], target=x.get("target"))
            for x in data.get("extras", [])
        ],
    )


def meta_to_dict(meta: CollectionMeta) -> dict:
    return {
        "id": meta.id,
        "name": meta.name,
        "description": meta.description,
        "domains": list(meta.domains),
        "declared_languages": list(meta.declared_languages),
    }


def meta_from_dict(data: dict) -> CollectionMeta:
    return CollectionMeta(
        id=data.get("id") or new_id(),
        name=data.get("name", ""),
        description=data.get("description"),
        domains=list(data.get("domains", [])),
        declared_languages=list(data.get("declared_languages", [])),
    )
