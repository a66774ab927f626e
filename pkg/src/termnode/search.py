"""Inverted index over term strings with tiered ranking and facet counts.

Matching is deliberately literal: NFC plus case folding, no stemming and no
diacritic stripping, because diacritics change meaning in the languages this
serves.  A query in a broad mode still ranks narrower matches higher: with
mode=substring an exact hit scores 3, a prefix hit 2 and everything else 1.

The index is a pure lookup structure.  It knows nothing about users; the
caller supplies a predicate saying which (collection, workflow status)
combinations the requesting actor may see.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from .errors import InvalidQuery
from .model import TermEntry, WorkflowStatus, canonical_lang, nfc


class MatchMode(Enum):
    EXACT = "exact"
    PREFIX = "prefix"
    SUBSTRING = "substring"


def normalize(text: str) -> str:
    """The one normalization applied to both terms and query text."""
    return nfc(text).casefold()


@dataclass
class SearchQuery:
    text: str
    mode: MatchMode = MatchMode.SUBSTRING
    collection_ids: Optional[set] = None
    languages: Optional[set] = None
    domains: Optional[set] = None
    include_drafts: bool = False
    offset: int = 0
    limit: int = 20


@dataclass
class SearchHit:
    entry_id: str
    collection_id: str
    matched_term: str
    lang: str
    score: int
    total: int = 0
    node_id: Optional[str] = None


@dataclass
class FacetCounts:
    languages: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)
    collections: dict = field(default_factory=dict)


@dataclass
class _Posting:
    """Everything the ranker needs about one indexed entry."""

    key: str
    entry_id: str
    collection_id: str
    node_id: Optional[str]
    status: WorkflowStatus
    domains: tuple
    langs: tuple
    terms: tuple  # of (normalized, original, lang)


def _tier(norm_term: str, needle: str) -> int:
    if norm_term == needle:
        return 3
    if norm_term.startswith(needle):
        return 2
    if needle in norm_term:
        return 1
    return 0


_MODE_FLOOR = {MatchMode.EXACT: 3, MatchMode.PREFIX: 2, MatchMode.SUBSTRING: 1}


class SearchIndex:
    def __init__(self, collection_name: Callable[[str], str]):
        self._collection_name = collection_name
        self._postings: dict[str, _Posting] = {}

    def index_entry(
        self, entry: TermEntry, collection_id: str, node_id: Optional[str] = None
    ) -> None:
        """Index (or re-index) one entry; prior postings for its key vanish."""
        key = entry.id if node_id is None else f"{node_id}/{entry.id}"
        terms = []
        for section in entry.lang_sections:
            lang = canonical_lang(section.lang)
            for record in section.terms:
                terms.append((normalize(record.term), record.term, lang))
        self._postings[key] = _Posting(
            key=key,
            entry_id=entry.id,
            collection_id=collection_id,
            node_id=node_id,
            status=entry.workflow_status,
            domains=tuple(entry.subject_fields),
            langs=tuple(dict.fromkeys(lang for _, _, lang in terms)),
            terms=tuple(terms),
        )

    def remove_entry(self, entry_id: str, node_id: Optional[str] = None) -> None:
        key = entry_id if node_id is None else f"{node_id}/{entry_id}"
        self._postings.pop(key, None)

    def clear(self) -> None:
        self._postings.clear()

    def __len__(self) -> int:
        return len(self._postings)

    # -- queries --------------------------------------------------------

    def search(
        self,
        q: SearchQuery,
        can_see: Callable[[str, WorkflowStatus], bool],
    ) -> list[SearchHit]:
        """Ranked hits among postings the predicate admits.

        Ordering is total: score descending, then collection name, then
        entry id, then node id so federated results with equal names stay
        stable.
        """
        needle = normalize(q.text.strip())
        if not needle:
            raise InvalidQuery("query text is empty after normalization")
        if q.limit < 1:
            raise InvalidQuery("limit must be at least 1")
        if q.offset < 0:
            raise InvalidQuery("offset must not be negative")
        floor = _MODE_FLOOR[q.mode]
        languages = {canonical_lang(l) for l in q.languages} if q.languages else None
        hits = []
        for posting in self._postings.values():
            match = self._best_match(posting, needle, floor, languages, q)
            if match is None:
                continue
            score, original, lang = match
            if not can_see(posting.collection_id, posting.status):
                continue
            hits.append(
                SearchHit(
                    entry_id=posting.entry_id,
                    collection_id=posting.collection_id,
                    matched_term=original,
                    lang=lang,
                    score=score,
                    node_id=posting.node_id,
                )
            )
        hits.sort(
            key=lambda h: (
                -h.score,
                self._collection_name(h.collection_id),
                h.entry_id,
                h.node_id or "",
            )
        )
        total = len(hits)
        page = hits[q.offset : q.offset + q.limit]
        for hit in page:
            hit.total = total
        return page

    def _best_match(self, posting, needle, floor, languages, q):
        if q.collection_ids is not None and posting.collection_id not in q.collection_ids:
            return None
        if q.domains is not None and not set(posting.domains) & set(q.domains):
            return None
        best = None
        for norm, original, lang in posting.terms:
            if languages is not None and lang not in languages:
                continue
            score = _tier(norm, needle)
            if score < floor:
                continue
            candidate = (-score, lang, norm, original)
            if best is None or candidate < best:
                best = candidate
        if best is None:
            return None
        neg_score, lang, _, original = best
        return (-neg_score, original, lang)

    def facet_counts(
        self,
        can_see: Callable[[str, WorkflowStatus], bool],
        collection_ids: Optional[set] = None,
        languages: Optional[set] = None,
        domains: Optional[set] = None,
    ) -> FacetCounts:
        """Counts over visible approved entries matching the filters.

        The filters pick entries; the counts then cover every language and
        domain of the matching entries.  Language counts tally (entry,
        language) pairs, domain and collection counts tally entries.
        """
        wanted_langs = {canonical_lang(l) for l in languages} if languages else None
        counts = FacetCounts()
        for posting in self._postings.values():
            if posting.status is not WorkflowStatus.APPROVED:
                continue
            if collection_ids is not None and posting.collection_id not in collection_ids:
                continue
            if domains is not None and not set(posting.domains) & set(domains):
                continue
            if wanted_langs is not None and not set(posting.langs) & wanted_langs:
                continue
            if not can_see(posting.collection_id, posting.status):
                continue
            for lang in posting.langs:
                counts.languages[lang] = counts.languages.get(lang, 0) + 1
            for domain in posting.domains:
                counts.domains[domain] = counts.domains.get(domain, 0) + 1
            cid = posting.collection_id
            counts.collections[cid] = counts.collections.get(cid, 0) + 1
        return counts


def iter_entry_terms(entry: TermEntry) -> Iterable[tuple[str, str, str]]:
    """(normalized, original, lang) triples; shared with the scan oracle."""
    for section in entry.lang_sections:
        lang = canonical_lang(section.lang)
        for record in section.terms:
            yield normalize(record.term), record.term, lang
