"""Collections, entries, the editorial workflow, discussions, and the
publication journal.

All durable state lives in one JSONL event log.  Every mutating operation
validates its inputs, builds an event, appends it, and applies it; opening
the store replays the log through the same apply path, so restart recovery
and normal operation cannot drift apart.  The search index is fed from the
apply path too, which keeps it consistent by construction and rebuilds it
from scratch on startup.

Journal rule: a ChangeRecord is emitted exactly when the published
projection (approved entries of public collections, plus their collection
descriptions) changes.  Drafts and private material never reach the
journal.  That means:

* creating a collection emits nothing (collections are born private);
* upserting an entry emits nothing, unless the edit demotes a previously
  approved entry in a public collection, which emits a delete;
* approving in a public collection emits an entry upsert;
* deleting an approved entry of a public collection emits a delete,
  deleting a draft emits nothing;
* making a collection public emits its description plus every approved
  entry; making it non-public emits a collection-level delete.

Visibility doubles as an existence filter: someone who may not read a
collection gets the same not-found error as for a collection that does not
exist, so private material cannot be probed.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import csv_codec
from .accounts import Action, Actor, Directory
from .errors import (
    AlreadyApproved,
    DuplicateName,
    EmptyBody,
    EncodingError,
    HeaderError,
    InvariantViolation,
    MalformedDocument,
    ParseFailed,
    RowArityError,
    StaleRevision,
    Unauthenticated,
    UnknownCollection,
    UnknownEntry,
    UnknownGroup,
    UnsupportedDialect,
    ValidationFailed,
)
from .federation import ChangeRecord, Entity, Op
from .model import (
    CollectionMeta,
    Severity,
    TermEntry,
    ValidationIssue,
    Visibility,
    WorkflowStatus,
    canonical_lang,
    entry_from_dict,
    entry_to_dict,
    is_uuid,
    meta_from_dict,
    meta_to_dict,
    new_id,
    now_timestamp,
)
from .search import FacetCounts, SearchHit, SearchIndex, SearchQuery
from .storage import EventLog
from .tbx import parse_tbx, serialize_entry_fragment, serialize_tbx
from .validation import has_errors, validate_entry

_PARSE_ERRORS = (MalformedDocument, UnsupportedDialect, EncodingError, HeaderError, RowArityError)


@dataclass
class Collection:
    meta: CollectionMeta
    owner_group: str
    visibility: Visibility = Visibility.PRIVATE
    created_at: str = ""
    modified_at: str = ""
    # Bumped whenever a collection-level journal record is emitted, so the
    # central can last-writer-wins on collection descriptions too.
    meta_revision: int = 0


@dataclass
class Tombstone:
    entry_id: str
    collection_id: str
    deleted_at: str
    revision: int


@dataclass
class Comment:
    id: str
    entry_id: str
    author: str
    body: str
    created_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "entry_id": self.entry_id,
            "author": self.author,
            "body": self.body,
            "created_at": self.created_at,
        }


@dataclass
class ImportReport:
    created: int = 0
    updated: int = 0
    skipped: int = 0
    issues: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "created": self.created,
            "updated": self.updated,
            "skipped": self.skipped,
            "issues": [issue.to_dict() for issue in self.issues],
        }


def _meta_payload(meta: CollectionMeta) -> bytes:
    return json.dumps(meta_to_dict(meta), sort_keys=True, separators=(",", ":")).encode("utf-8")


class Store:
    def __init__(
        self,
        log: EventLog,
        directory: Directory,
        clock: Callable[[], str] = now_timestamp,
    ):
        self.log = log
        self.directory = directory
        self.clock = clock
        self.collections: dict[str, Collection] = {}
        self.entries: dict[str, dict[str, TermEntry]] = {}
        self.entry_collection: dict[str, str] = {}
        self.tombstones: dict[str, Tombstone] = {}
        self.comments: dict[str, list[Comment]] = {}
        self.journal: list[ChangeRecord] = []
        self.sync_cursor = 0
        self.index = SearchIndex(self._collection_name)
        self._lock = threading.RLock()
        self._journal_listeners: list[Callable[[], None]] = []
        for event in log.replay():
            self._apply(event)

    def close(self) -> None:
        self.log.close()

    def _collection_name(self, collection_id: str) -> str:
        coll = self.collections.get(collection_id)
        return coll.meta.name if coll else ""

    def add_journal_listener(self, callback: Callable[[], None]) -> None:
        """Callback fires after any mutation that grew the journal."""
        self._journal_listeners.append(callback)

    def journal_snapshot(self) -> list[ChangeRecord]:
        with self._lock:
            return list(self.journal)

    # -- event plumbing --------------------------------------------------

    def _record(self, event: dict) -> None:
        before = len(self.journal)
        self.log.append(event)
        self._apply(event)
        if len(self.journal) != before:
            for callback in self._journal_listeners:
                callback()

    def _next_seq(self) -> int:
        return self.journal[-1].seq + 1 if self.journal else 1

    def _emit(self, entity, op, collection_id, entry_id, payload, revision, at) -> None:
        self.journal.append(
            ChangeRecord(
                seq=self._next_seq(),
                entity=entity,
                op=op,
                collection_id=collection_id,
                entry_id=entry_id,
                payload=payload,
                revision=revision,
                at=at,
            )
        )

    def _apply(self, event: dict) -> None:
        kind = event["kind"]
        if kind == "collection_created":
            meta = meta_from_dict(event["meta"])
            self.collections[meta.id] = Collection(
                meta=meta,
                owner_group=event["owner_group"],
                created_at=event["at"],
                modified_at=event["at"],
            )
            self.entries[meta.id] = {}
        elif kind == "entry_upserted":
            cid = event["collection_id"]
            entry = entry_from_dict(event["entry"])
            coll = self.collections[cid]
            prior = self.entries[cid].get(entry.id)
            if (
                coll.visibility is Visibility.PUBLIC
                and prior is not None
                and prior.workflow_status is WorkflowStatus.APPROVED
            ):
                # The edit pulls an approved entry back to draft, which
                # unpublishes it.
                self._emit(
                    Entity.ENTRY, Op.DELETE, cid, entry.id, None, entry.revision, event["at"]
                )
            self.entries[cid][entry.id] = entry
            self.entry_collection[entry.id] = cid
            self.tombstones.pop(entry.id, None)
            self.index.index_entry(entry, cid)
        elif kind == "entry_approved":
            cid, eid = event["collection_id"], event["entry_id"]
            entry = self.entries[cid][eid]
            entry.workflow_status = WorkflowStatus.APPROVED
            entry.revision += 1
            entry.modified_at = event["at"]
            entry.modified_by = event["by"]
            coll = self.collections[cid]
            if coll.visibility is Visibility.PUBLIC:
                self._emit(
                    Entity.ENTRY,
                    Op.UPSERT,
                    cid,
                    eid,
                    serialize_entry_fragment(entry),
                    entry.revision,
                    event["at"],
                )
            self.index.index_entry(entry, cid)
        elif kind == "entry_deleted":
            cid, eid = event["collection_id"], event["entry_id"]
            entry = self.entries[cid].pop(eid)
            self.entry_collection.pop(eid, None)
            self.comments.pop(eid, None)
            revision = entry.revision + 1
            self.tombstones[eid] = Tombstone(eid, cid, event["at"], revision)
            coll = self.collections[cid]
            if (
                coll.visibility is Visibility.PUBLIC
                and entry.workflow_status is WorkflowStatus.APPROVED
            ):
                self._emit(Entity.ENTRY, Op.DELETE, cid, eid, None, revision, event["at"])
            self.index.remove_entry(eid)
        elif kind == "visibility_set":
            cid = event["collection_id"]
            coll = self.collections[cid]
            old, new = coll.visibility, Visibility(event["visibility"])
            coll.visibility = new
            coll.modified_at = event["at"]
            if new is Visibility.PUBLIC and old is not Visibility.PUBLIC:
                coll.meta_revision += 1
                self._emit(
                    Entity.COLLECTION_META,
                    Op.UPSERT,
                    cid,
                    None,
                    _meta_payload(coll.meta),
                    coll.meta_revision,
                    event["at"],
                )
                for eid in sorted(self.entries[cid]):
                    entry = self.entries[cid][eid]
                    if entry.workflow_status is WorkflowStatus.APPROVED:
                        self._emit(
                            Entity.ENTRY,
                            Op.UPSERT,
                            cid,
                            eid,
                            serialize_entry_fragment(entry),
                            entry.revision,
                            event["at"],
                        )
            elif old is Visibility.PUBLIC and new is not Visibility.PUBLIC:
                coll.meta_revision += 1
                self._emit(
                    Entity.COLLECTION_META,
                    Op.DELETE,
                    cid,
                    None,
                    None,
                    coll.meta_revision,
                    event["at"],
                )
        elif kind == "comment_posted":
            comment = Comment(
                id=event["id"],
                entry_id=event["entry_id"],
                author=event["author"],
                body=event["body"],
                created_at=event["at"],
            )
            self.comments.setdefault(comment.entry_id, []).append(comment)
        elif kind == "sync_cursor_set":
            self.sync_cursor = event["value"]
        elif kind == "journal_reset":
            self.journal.clear()
            self.sync_cursor = 0
            for cid in sorted(self.collections):
                coll = self.collections[cid]
                if coll.visibility is not Visibility.PUBLIC:
                    continue
                self._emit(
                    Entity.COLLECTION_META,
                    Op.UPSERT,
                    cid,
                    None,
                    _meta_payload(coll.meta),
                    coll.meta_revision,
                    event["at"],
                )
                for eid in sorted(self.entries[cid]):
                    entry = self.entries[cid][eid]
                    if entry.workflow_status is WorkflowStatus.APPROVED:
                        self._emit(
                            Entity.ENTRY,
                            Op.UPSERT,
                            cid,
                            eid,
                            serialize_entry_fragment(entry),
                            entry.revision,
                            event["at"],
                        )
        else:
            raise ValueError(f"unknown store event kind: {kind}")

    # -- access helpers --------------------------------------------------

    def _visible_collection(self, collection_id: str, actor: Actor) -> Collection:
        coll = self.collections.get(collection_id)
        if coll is None or not self.directory.can_read(actor, coll.owner_group, coll.visibility):
            raise UnknownCollection(f"no such collection: {collection_id}")
        return coll

    def _is_member(self, actor: Actor, coll: Collection) -> bool:
        return actor.is_system or actor.role_in(coll.owner_group) is not None

    # -- collections -----------------------------------------------------

    def create_collection(self, meta: CollectionMeta, owner_group: str, actor: Actor) -> str:
        with self._lock:
            if owner_group not in self.directory.groups:
                raise UnknownGroup(f"no such group: {owner_group}")
            self.directory.authorize(
                actor, Action.CREATE_COLLECTION, owner_group, Visibility.PRIVATE
            )
            name = meta.name.strip()
            if not name:
                raise ValidationFailed(
                    [
                        ValidationIssue(
                            Severity.ERROR,
                            "INVALID_VALUE",
                            "collection/name",
                            "collection name must not be empty",
                        )
                    ]
                )
            for coll in self.collections.values():
                if coll.owner_group == owner_group and coll.meta.name == name:
                    raise DuplicateName(f"group {owner_group} already has a collection {name!r}")
            cid = meta.id if is_uuid(meta.id) and meta.id not in self.collections else new_id()
            doc = meta_to_dict(meta)
            doc["id"] = cid
            doc["name"] = name
            self._record(
                {
                    "kind": "collection_created",
                    "meta": doc,
                    "owner_group": owner_group,
                    "at": self.clock(),
                    "by": actor.username,
                }
            )
            return cid

    def get_collection(self, collection_id: str, actor: Actor) -> Collection:
        with self._lock:
            return self._visible_collection(collection_id, actor)

    def list_collections(self, actor: Actor) -> list[Collection]:
        with self._lock:
            visible = [
                coll
                for coll in self.collections.values()
                if self.directory.can_read(actor, coll.owner_group, coll.visibility)
            ]
            return sorted(visible, key=lambda c: (c.meta.name, c.meta.id))

    def set_visibility(self, collection_id: str, visibility: Visibility, actor: Actor) -> None:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            self.directory.authorize(
                actor, Action.SET_VISIBILITY, coll.owner_group, coll.visibility
            )
            if coll.visibility is visibility:
                return
            self._record(
                {
                    "kind": "visibility_set",
                    "collection_id": collection_id,
                    "visibility": visibility.value,
                    "at": self.clock(),
                    "by": actor.username,
                }
            )

    # -- entries ---------------------------------------------------------

    def upsert_entry(
        self,
        collection_id: str,
        entry: TermEntry,
        actor: Actor,
        base_revision: Optional[int] = None,
    ) -> int:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            self.directory.authorize(actor, Action.UPSERT_ENTRY, coll.owner_group, coll.visibility)
            issues = validate_entry(entry)
            if has_errors(issues):
                raise ValidationFailed(issues)
            return self._upsert_validated(collection_id, entry, actor, base_revision)

    def _upsert_validated(self, collection_id, entry, actor, base_revision) -> int:
        home = self.entry_collection.get(entry.id)
        if home is not None and home != collection_id:
            raise InvariantViolation(f"entry {entry.id} belongs to collection {home}")
        tomb = self.tombstones.get(entry.id)
        if tomb is not None and tomb.collection_id != collection_id:
            raise InvariantViolation(f"entry id {entry.id} was used in collection {tomb.collection_id}")
        current = self.entries[collection_id].get(entry.id)
        if current is not None:
            if base_revision is not None and base_revision != current.revision:
                raise StaleRevision(
                    f"entry {entry.id} is at revision {current.revision}, not {base_revision}"
                )
            revision = current.revision + 1
        else:
            if base_revision not in (None, 0):
                raise StaleRevision(f"entry {entry.id} does not exist yet")
            revision = tomb.revision + 1 if tomb is not None else 1
        now = self.clock()
        doc = entry_to_dict(entry)
        doc["workflow_status"] = WorkflowStatus.DRAFT.value
        doc["revision"] = revision
        doc["modified_at"] = now
        doc["modified_by"] = actor.username
        self._record(
            {
                "kind": "entry_upserted",
                "collection_id": collection_id,
                "entry": doc,
                "at": now,
                "by": actor.username,
            }
        )
        return revision

    def get_entry(self, collection_id: str, entry_id: str, actor: Actor) -> TermEntry:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            entry = self.entries[collection_id].get(entry_id)
            if entry is None:
                raise UnknownEntry(f"no such entry: {entry_id}")
            if entry.workflow_status is WorkflowStatus.DRAFT and not self._is_member(actor, coll):
                raise UnknownEntry(f"no such entry: {entry_id}")
            return entry

    def approve_entry(self, collection_id: str, entry_id: str, actor: Actor) -> int:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            self.directory.authorize(
                actor, Action.APPROVE_ENTRY, coll.owner_group, coll.visibility
            )
            entry = self.entries[collection_id].get(entry_id)
            if entry is None:
                raise UnknownEntry(f"no such entry: {entry_id}")
            if entry.workflow_status is WorkflowStatus.APPROVED:
                raise AlreadyApproved(f"entry {entry_id} is already approved")
            self._record(
                {
                    "kind": "entry_approved",
                    "collection_id": collection_id,
                    "entry_id": entry_id,
                    "at": self.clock(),
                    "by": actor.username,
                }
            )
            return self.entries[collection_id][entry_id].revision

    def delete_entry(self, collection_id: str, entry_id: str, actor: Actor) -> Tombstone:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            self.directory.authorize(actor, Action.DELETE_ENTRY, coll.owner_group, coll.visibility)
            if entry_id not in self.entries[collection_id]:
                raise UnknownEntry(f"no such entry: {entry_id}")
            self._record(
                {
                    "kind": "entry_deleted",
                    "collection_id": collection_id,
                    "entry_id": entry_id,
                    "at": self.clock(),
                    "by": actor.username,
                }
            )
            return self.tombstones[entry_id]

    # -- import / export -------------------------------------------------

    def import_collection(
        self, collection_id: str, format: str, document: bytes, actor: Actor
    ) -> ImportReport:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            self.directory.authorize(actor, Action.IMPORT, coll.owner_group, coll.visibility)
            if format == "tbx":
                try:
                    _, parsed, issues = parse_tbx(document)
                except _PARSE_ERRORS as exc:
                    raise ParseFailed(str(exc)) from exc
            elif format == "csv":
                try:
                    parsed, issues = csv_codec.parse_csv(document)
                except _PARSE_ERRORS as exc:
                    raise ParseFailed(str(exc)) from exc
            else:
                raise ParseFailed(f"unknown import format: {format}")
            report = ImportReport(issues=list(issues))
            for entry in parsed:
                entry_issues = validate_entry(entry)
                if has_errors(entry_issues):
                    report.skipped += 1
                    report.issues.extend(entry_issues)
                    continue
                home = self.entry_collection.get(entry.id)
                tomb = self.tombstones.get(entry.id)
                if (home is not None and home != collection_id) or (
                    tomb is not None and tomb.collection_id != collection_id
                ):
                    report.skipped += 1
                    report.issues.append(
                        ValidationIssue(
                            Severity.ERROR,
                            "DUPLICATE_ID",
                            f"entry/{entry.id}",
                            "entry id already used by another collection",
                        )
                    )
                    continue
                existed = entry.id in self.entries[collection_id]
                self._upsert_validated(collection_id, entry, actor, base_revision=None)
                if existed:
                    report.updated += 1
                else:
                    report.created += 1
            return report

    def export_collection(
        self, collection_id: str, format: str, include_drafts: bool, actor: Actor
    ) -> bytes:
        with self._lock:
            coll = self._visible_collection(collection_id, actor)
            self.directory.authorize(actor, Action.EXPORT, coll.owner_group, coll.visibility)
            with_drafts = include_drafts and self._is_member(actor, coll)
            selected = [
                self.entries[collection_id][eid]
                for eid in sorted(self.entries[collection_id])
                if with_drafts
                or self.entries[collection_id][eid].workflow_status is WorkflowStatus.APPROVED
            ]
            if format == "tbx":
                return serialize_tbx(coll.meta, selected)
            if format == "csv":
                languages = [canonical_lang(l) for l in coll.meta.declared_languages]
                if not languages:
                    union = {canonical_lang(l) for e in selected for l in e.languages()}
                    # A language-less CSV header cannot be re-imported, so an
                    # empty collection still declares one column.
                    languages = sorted(union) or ["en"]
                return csv_codec.serialize_csv(selected, languages)
            raise ParseFailed(f"unknown export format: {format}")

    # -- discussions -----------------------------------------------------

    def _visible_entry_home(self, entry_id: str, actor: Actor) -> Collection:
        cid = self.entry_collection.get(entry_id)
        if cid is None:
            raise UnknownEntry(f"no such entry: {entry_id}")
        coll = self.collections[cid]
        if not self.directory.can_read(actor, coll.owner_group, coll.visibility):
            raise UnknownEntry(f"no such entry: {entry_id}")
        entry = self.entries[cid][entry_id]
        if entry.workflow_status is WorkflowStatus.DRAFT and not self._is_member(actor, coll):
            raise UnknownEntry(f"no such entry: {entry_id}")
        return coll

    def post_comment(self, entry_id: str, body: str, actor: Actor) -> Comment:
        with self._lock:
            coll = self._visible_entry_home(entry_id, actor)
            if actor.is_anonymous:
                raise Unauthenticated("sign in to join the discussion")
            self.directory.authorize(actor, Action.COMMENT, coll.owner_group, coll.visibility)
            if not body.strip():
                raise EmptyBody("comment body must not be empty")
            self._record(
                {
                    "kind": "comment_posted",
                    "id": new_id(),
                    "entry_id": entry_id,
                    "author": actor.username,
                    "body": body,
                    "at": self.clock(),
                }
            )
            return self.comments[entry_id][-1]

    def list_comments(self, entry_id: str, actor: Actor) -> list[Comment]:
        with self._lock:
            self._visible_entry_home(entry_id, actor)
            thread = list(self.comments.get(entry_id, []))
            thread.sort(key=lambda c: (c.created_at, c.id))
            return thread

    # -- search ----------------------------------------------------------

    def _visibility_predicate(self, actor: Actor, include_drafts: bool):
        def can_see(collection_id: str, status: WorkflowStatus) -> bool:
            coll = self.collections.get(collection_id)
            if coll is None:
                return False
            if not self.directory.can_read(actor, coll.owner_group, coll.visibility):
                return False
            if status is WorkflowStatus.DRAFT:
                return include_drafts and self._is_member(actor, coll)
            return True

        return can_see

    def search(self, q: SearchQuery, actor: Actor) -> list[SearchHit]:
        with self._lock:
            return self.index.search(q, self._visibility_predicate(actor, q.include_drafts))

    def facet_counts(
        self,
        actor: Actor,
        collection_ids: Optional[set] = None,
        languages: Optional[set] = None,
        domains: Optional[set] = None,
    ) -> FacetCounts:
        with self._lock:
            return self.index.facet_counts(
                self._visibility_predicate(actor, include_drafts=False),
                collection_ids=collection_ids,
                languages=languages,
                domains=domains,
            )

    # -- federation support ----------------------------------------------

    def set_sync_cursor(self, value: int) -> None:
        with self._lock:
            if value == self.sync_cursor:
                return
            self._record({"kind": "sync_cursor_set", "value": value})

    def reset_journal(self) -> int:
        """Rebuild the journal from the current published projection.

        Used for full resync after the central has reset this node's
        cursor; the fresh journal starts again at seq 1.
        """
        with self._lock:
            self._record({"kind": "journal_reset", "at": self.clock()})
            return len(self.journal)

    def public_projection(self) -> dict:
        """What of this node the network should see; for convergence checks."""
        with self._lock:
            out = {}
            for cid in sorted(self.collections):
                coll = self.collections[cid]
                if coll.visibility is not Visibility.PUBLIC:
                    continue
                out[cid] = {
                    "meta": meta_to_dict(coll.meta),
                    "entries": {
                        eid: entry_to_dict(entry)
                        for eid, entry in self.entries[cid].items()
                        if entry.workflow_status is WorkflowStatus.APPROVED
                    },
                }
            return out
