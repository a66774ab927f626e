"""Brute-force reference implementations used to check the search index.

Everything here is written directly from the pinned matching rules, without
touching the index internals: walk every entry, apply normalization, match
mode, filters and visibility by hand, then sort by the documented order.
"""

import unicodedata

from termnode.model import WorkflowStatus
from termnode.search import MatchMode


def norm(text):
    return unicodedata.normalize("NFC", text).casefold()


def tier_of(term_norm, needle):
    if term_norm == needle:
        return 3
    if term_norm.startswith(needle):
        return 2
    if needle in term_norm:
        return 1
    return 0


FLOORS = {MatchMode.EXACT: 3, MatchMode.PREFIX: 2, MatchMode.SUBSTRING: 1}


def entry_readable(store, actor, coll, entry, include_drafts):
    if not store.directory.can_read(actor, coll.owner_group, coll.visibility):
        return False
    if entry.workflow_status is WorkflowStatus.DRAFT:
        member = actor.is_system or actor.role_in(coll.owner_group) is not None
        return include_drafts and member
    return True


def scan_search(store, q, actor):
    """(entry_id, collection_id, matched_term, lang, score) rows, ordered."""
    needle = norm(q.text.strip())
    floor = FLOORS[q.mode]
    langs = {l.strip().lower() for l in q.languages} if q.languages else None
    rows = []
    for cid, coll in store.collections.items():
        if q.collection_ids is not None and cid not in q.collection_ids:
            continue
        for eid, entry in store.entries[cid].items():
            if not entry_readable(store, actor, coll, entry, q.include_drafts):
                continue
            if q.domains is not None and not set(entry.subject_fields) & set(q.domains):
                continue
            best = None
            for section in entry.lang_sections:
                lang = section.lang.strip().lower()
                if langs is not None and lang not in langs:
                    continue
                for record in section.terms:
                    score = tier_of(norm(record.term), needle)
                    if score < floor:
                        continue
                    candidate = (-score, lang, norm(record.term), record.term)
                    if best is None or candidate < best:
                        best = candidate
            if best is not None:
                rows.append(
                    {
                        "entry_id": eid,
                        "collection_id": cid,
                        "matched_term": best[3],
                        "lang": best[1],
                        "score": -best[0],
                    }
                )
    rows.sort(
        key=lambda r: (
            -r["score"],
            store.collections[r["collection_id"]].meta.name,
            r["entry_id"],
        )
    )
    total = len(rows)
    page = rows[q.offset : q.offset + q.limit]
    for row in page:
        row["total"] = total
    return page


def scan_facets(store, actor, collection_ids=None, languages=None, domains=None):
    langs = {l.strip().lower() for l in languages} if languages else None
    by_lang, by_domain, by_coll = {}, {}, {}
    for cid, coll in store.collections.items():
        if collection_ids is not None and cid not in collection_ids:
            continue
        if not store.directory.can_read(actor, coll.owner_group, coll.visibility):
            continue
        for entry in store.entries[cid].values():
            if entry.workflow_status is not WorkflowStatus.APPROVED:
                continue
            entry_langs = []
            for section in entry.lang_sections:
                code = section.lang.strip().lower()
                if code not in entry_langs:
                    entry_langs.append(code)
            if langs is not None and not set(entry_langs) & langs:
                continue
            if domains is not None and not set(entry.subject_fields) & set(domains):
                continue
            for code in entry_langs:
                by_lang[code] = by_lang.get(code, 0) + 1
            for domain in entry.subject_fields:
                by_domain[domain] = by_domain.get(domain, 0) + 1
            by_coll[cid] = by_coll.get(cid, 0) + 1
    return {"languages": by_lang, "domains": by_domain, "collections": by_coll}


def hit_rows(hits):
    """Flatten SearchHit objects for comparison against scan_search output."""
    return [
        {
            "entry_id": h.entry_id,
            "collection_id": h.collection_id,
            "matched_term": h.matched_term,
            "lang": h.lang,
            "score": h.score,
            "total": h.total,
        }
        for h in hits
    ]
