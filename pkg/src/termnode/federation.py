"""Node to central push synchronisation.

The node keeps a strictly ordered journal of changes to its published data
(approved entries of public collections, plus the collection descriptions
themselves).  Batches of journal records are pushed over HTTP; the central
side applies them idempotently, keyed by node, and answers with an Ack that
tells the node how far it got.  Delivery is at-least-once: duplicates and
replays must land on identical central state, and a gap makes the central
refuse the batch so the node resends from the right place.

Entry payloads travel as TBX fragments; collection descriptions travel as
canonical JSON documents in the same payload slot.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Protocol

from .errors import AuthRejected, TransportError
from .model import (
    CollectionMeta,
    TermEntry,
    entry_to_dict,
    meta_from_dict,
    new_id,
    now_timestamp,
)
from .search import SearchHit, SearchIndex, SearchQuery
from .tbx import parse_entry_fragment

PROTOCOL_VERSION = 1


class Entity(Enum):
    COLLECTION_META = "collection_meta"
    ENTRY = "entry"


class Op(Enum):
    UPSERT = "upsert"
    DELETE = "delete"


@dataclass
class ChangeRecord:
    seq: int
    entity: Entity
    op: Op
    collection_id: str
    entry_id: Optional[str]
    payload: Optional[bytes]
    revision: int
    at: str

    def to_wire(self) -> dict:
        wire = {
            "seq": self.seq,
            "entity": self.entity.value,
            "op": self.op.value,
            "collection_id": self.collection_id,
            "revision": self.revision,
            "at": self.at,
        }
        if self.entry_id is not None:
            wire["entry_id"] = self.entry_id
        if self.payload is not None:
            wire["payload_tbx"] = self.payload.decode("utf-8")
        return wire

    @classmethod
    def from_wire(cls, wire: dict) -> "ChangeRecord":
        payload = wire.get("payload_tbx")
        return cls(
            seq=int(wire["seq"]),
            entity=Entity(wire["entity"]),
            op=Op(wire["op"]),
            collection_id=wire["collection_id"],
            entry_id=wire.get("entry_id"),
            payload=payload.encode("utf-8") if payload is not None else None,
            revision=int(wire["revision"]),
            at=wire["at"],
        )


def canonical_changes(changes: list[ChangeRecord]) -> bytes:
    """The byte string the checksum covers; ASCII JSON, sorted keys."""
    return json.dumps(
        [record.to_wire() for record in changes],
        sort_keys=True,
        separators=(",", ":"),
    ).encode("ascii")


def checksum_of(changes: list[ChangeRecord]) -> str:
    return hashlib.sha256(canonical_changes(changes)).hexdigest()


@dataclass
class SyncBatch:
    node_id: str
    first_seq: int
    last_seq: int
    changes: list[ChangeRecord]
    checksum: str
    protocol_version: int = PROTOCOL_VERSION

    def to_wire(self) -> dict:
        return {
            "protocol_version": self.protocol_version,
            "node_id": self.node_id,
            "first_seq": self.first_seq,
            "last_seq": self.last_seq,
            "checksum": self.checksum,
            "changes": [record.to_wire() for record in self.changes],
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "SyncBatch":
        return cls(
            node_id=wire["node_id"],
            first_seq=int(wire["first_seq"]),
            last_seq=int(wire["last_seq"]),
            changes=[ChangeRecord.from_wire(c) for c in wire.get("changes", [])],
            checksum=wire["checksum"],
            protocol_version=int(wire.get("protocol_version", 0)),
        )


class AckStatus(Enum):
    OK = "ok"
    OUT_OF_ORDER = "out_of_order"
    CHECKSUM_MISMATCH = "checksum_mismatch"
    VERSION_UNSUPPORTED = "version_unsupported"


@dataclass
class Ack:
    node_id: str
    last_applied_seq: int
    status: AckStatus
    detail: Optional[str] = None

    def to_wire(self) -> dict:
        wire = {
            "node_id": self.node_id,
            "last_applied_seq": self.last_applied_seq,
            "status": self.status.value,
        }
        if self.detail is not None:
            wire["detail"] = self.detail
        return wire

    @classmethod
    def from_wire(cls, wire: dict) -> "Ack":
        return cls(
            node_id=wire["node_id"],
            last_applied_seq=int(wire["last_applied_seq"]),
            status=AckStatus(wire["status"]),
            detail=wire.get("detail"),
        )


def build_sync_batch(
    journal: list[ChangeRecord], since_seq: int, max_changes: int
) -> Optional[SyncBatch]:
    """Next window of journal records past since_seq, or None when caught up."""
    if max_changes < 1:
        raise ValueError("max_changes must be at least 1")
    window = [r for r in journal if r.seq > since_seq][:max_changes]
    if not window:
        return None
    node_id = ""  # filled by the caller that owns the node identity
    return SyncBatch(
        node_id=node_id,
        first_seq=window[0].seq,
        last_seq=window[-1].seq,
        changes=window,
        checksum=checksum_of(window),
    )


# -- transports ---------------------------------------------------------


class Transport(Protocol):
    def post_json(self, url: str, body: dict, token: str) -> tuple[int, dict]:
        """Deliver a JSON body; returns (http status, decoded response)."""


class HttpTransport:
    """Real HTTP delivery via httpx with a fixed per-request timeout."""

    def __init__(self, timeout: float = 10.0):
        self.timeout = timeout

    def post_json(self, url: str, body: dict, token: str) -> tuple[int, dict]:
        import httpx

        try:
            response = httpx.post(
                url,
                json=body,
                headers={"Authorization": f"Bearer {token}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        try:
            payload = response.json()
        except ValueError as exc:
            raise TransportError(f"non-JSON response (HTTP {response.status_code})") from exc
        return response.status_code, payload


class InProcessTransport:
    """Short-circuits the wire for harnesses: calls a central object directly."""

    def __init__(self, central: "CentralState"):
        self.central = central

    def post_json(self, url: str, body: dict, token: str) -> tuple[int, dict]:
        if url.endswith("/sync/v1/batch"):
            return self.central.receive_batch(body, token)
        if url.endswith("/sync/v1/register"):
            return self.central.receive_register(body, token)
        raise TransportError(f"no such endpoint: {url}")


def push_batch(
    endpoint: str,
    batch: SyncBatch,
    token: str,
    transport: Transport,
    *,
    max_attempts: int = 4,
    backoff_base: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> Ack:
    """Deliver one batch, retrying transport failures with backoff."""
    url = endpoint.rstrip("/") + "/sync/v1/batch"
    attempt = 0
    while True:
        attempt += 1
        try:
            status, payload = transport.post_json(url, batch.to_wire(), token)
        except TransportError:
            if attempt >= max_attempts:
                raise
            sleep(backoff_base * (2 ** (attempt - 1)))
            continue
        if status == 401:
            raise AuthRejected(payload.get("detail", "central rejected credentials"))
        if status != 200:
            raise TransportError(f"unexpected HTTP {status} from central")
        return Ack.from_wire(payload)


# -- central side -------------------------------------------------------


@dataclass
class NodeState:
    node_id: str
    display_name: str
    last_applied_seq: int = 0
    last_contact_at: str = ""


@dataclass
class _NodeData:
    """Consolidated copy of one node's published material."""

    collections: dict = field(default_factory=dict)  # cid -> meta dict
    collection_revisions: dict = field(default_factory=dict)  # cid -> revision
    collection_tombstones: dict = field(default_factory=dict)  # cid -> revision
    entries: dict = field(default_factory=dict)  # eid -> consolidated record dict
    entry_tombstones: dict = field(default_factory=dict)  # eid -> revision


class CentralState:
    """The aggregator: node registry plus per-node consolidated stores.

    Batches from different nodes may apply concurrently; everything a node
    sends is namespaced by its node id, so nodes can never clobber each
    other.  All protocol failures travel as Ack statuses over HTTP 200;
    only authentication uses an HTTP error code.
    """

    def __init__(self, admin_token: str, clock: Callable[[], str] = now_timestamp, log=None):
        self.admin_token = admin_token
        self.clock = clock
        self.log = log
        self.registry: dict[str, NodeState] = {}
        self.tokens: dict[str, str] = {}  # node_id -> bearer token
        self.data: dict[str, _NodeData] = {}
        self._lock = threading.RLock()
        self._index = SearchIndex(self._collection_name)
        self._names: dict[str, str] = {}  # collection_id -> name
        self._replaying = False
        if log is not None:
            self._replaying = True
            try:
                for event in log.replay():
                    if event["kind"] == "node_registered":
                        self._admit(event["node_id"], event["display_name"], event["token"])
                    elif event["kind"] == "batch_applied":
                        batch = SyncBatch.from_wire(event["batch"])
                        self.apply_batch(batch, self.registry[batch.node_id])
            finally:
                self._replaying = False

    def _collection_name(self, collection_id: str) -> str:
        return self._names.get(collection_id, "")

    # -- registration ----------------------------------------------------

    def register_node(self, node_id: str, display_name: str) -> str:
        """Admit (or reset) a node; returns its fresh bearer token.

        Re-registering an existing node id resets its cursor to zero and
        rotates the token, which is the recovery path before a full resync.
        """
        with self._lock:
            token = "node-" + new_id()
            self._admit(node_id, display_name, token)
            if self.log is not None:
                self.log.append(
                    {
                        "kind": "node_registered",
                        "node_id": node_id,
                        "display_name": display_name,
                        "token": token,
                    }
                )
            return token

    def _admit(self, node_id: str, display_name: str, token: str) -> None:
        self.registry[node_id] = NodeState(
            node_id=node_id,
            display_name=display_name,
            last_applied_seq=0,
            last_contact_at=self.clock(),
        )
        self.tokens[node_id] = token
        self.data.setdefault(node_id, _NodeData())

    def node_for_token(self, token: str) -> Optional[str]:
        for node_id, node_token in self.tokens.items():
            if node_token == token:
                return node_id
        return None

    # -- apply path ------------------------------------------------------

    def apply_batch(self, batch: SyncBatch, node: NodeState) -> Ack:
        with self._lock:
            node.last_contact_at = self.clock()
            if batch.protocol_version != PROTOCOL_VERSION:
                return Ack(
                    node.node_id,
                    node.last_applied_seq,
                    AckStatus.VERSION_UNSUPPORTED,
                    f"central speaks protocol {PROTOCOL_VERSION}",
                )
            if checksum_of(batch.changes) != batch.checksum:
                return Ack(
                    node.node_id,
                    node.last_applied_seq,
                    AckStatus.CHECKSUM_MISMATCH,
                    "checksum does not cover the received changes",
                )
            cursor = node.last_applied_seq
            if batch.last_seq <= cursor:
                # Entirely stale duplicate; harmless by design.
                return Ack(node.node_id, cursor, AckStatus.OK, "already applied")
            if batch.first_seq > cursor + 1:
                return Ack(
                    node.node_id,
                    cursor,
                    AckStatus.OUT_OF_ORDER,
                    f"expected seq {cursor + 1}, batch starts at {batch.first_seq}",
                )
            pending = [r for r in batch.changes if r.seq > cursor]
            # Parse everything before touching state so a bad record cannot
            # leave a half-applied batch behind.
            parsed = [self._parse_record(record) for record in pending]
            data = self.data[node.node_id]
            for record, value in zip(pending, parsed):
                self._apply_record(node.node_id, data, record, value)
                cursor = record.seq
            node.last_applied_seq = cursor
            if self.log is not None and not self._replaying:
                self.log.append({"kind": "batch_applied", "batch": batch.to_wire()})
            return Ack(node.node_id, cursor, AckStatus.OK)

    def _parse_record(self, record: ChangeRecord):
        if record.op is Op.DELETE:
            return None
        if record.payload is None:
            raise ValueError(f"seq {record.seq}: upsert without payload")
        if record.entity is Entity.ENTRY:
            return parse_entry_fragment(record.payload)
        return json.loads(record.payload.decode("utf-8"))

    def _apply_record(self, node_id, data: _NodeData, record: ChangeRecord, value) -> None:
        if record.entity is Entity.COLLECTION_META:
            cid = record.collection_id
            if record.op is Op.UPSERT:
                if record.revision >= data.collection_revisions.get(cid, -1):
                    data.collections[cid] = value
                    data.collection_revisions[cid] = record.revision
                    data.collection_tombstones.pop(cid, None)
                    self._names[cid] = value.get("name", "")
            else:
                if record.revision >= data.collection_revisions.get(cid, -1):
                    data.collections.pop(cid, None)
                    data.collection_revisions[cid] = record.revision
                    data.collection_tombstones[cid] = record.revision
                    for eid in [
                        e for e, rec in data.entries.items() if rec["collection_id"] == cid
                    ]:
                        del data.entries[eid]
                        data.entry_tombstones.pop(eid, None)
                        self._index.remove_entry(eid, node_id)
            return
        eid = record.entry_id
        current_rev = data.entry_tombstones.get(eid, -1)
        if eid in data.entries:
            current_rev = max(current_rev, data.entries[eid]["revision"])
        if record.revision < current_rev or (
            record.revision == current_rev and record.op is Op.DELETE and eid in data.entries
        ):
            return
        if record.op is Op.UPSERT:
            entry = value
            data.entries[eid] = {
                "collection_id": record.collection_id,
                "revision": record.revision,
                "at": record.at,
                "tbx": record.payload.decode("utf-8"),
                "entry": entry,
            }
            data.entry_tombstones.pop(eid, None)
            self._index.index_entry(entry, record.collection_id, node_id)
        else:
            data.entries.pop(eid, None)
            data.entry_tombstones[eid] = record.revision
            self._index.remove_entry(eid, node_id)

    # -- wire handlers (shared by HTTP route and in-process transport) ---

    def receive_batch(self, body: dict, token: str) -> tuple[int, dict]:
        node_id = self.node_for_token(token)
        if node_id is None:
            return 401, {"detail": "unknown node credentials"}
        try:
            batch = SyncBatch.from_wire(body)
        except (KeyError, ValueError, TypeError):
            return 400, {"detail": "malformed batch envelope"}
        if batch.node_id != node_id:
            return 401, {"detail": "token does not match node_id"}
        ack = self.apply_batch(batch, self.registry[node_id])
        return 200, ack.to_wire()

    def receive_register(self, body: dict, token: str) -> tuple[int, dict]:
        if token != self.admin_token:
            return 401, {"detail": "admin token required"}
        node_id = body.get("node_id") or new_id()
        display_name = body.get("display_name", "")
        issued = self.register_node(node_id, display_name)
        return 200, {"node_id": node_id, "token": issued}

    # -- read side -------------------------------------------------------

    def consolidated_lookup(self, q: SearchQuery) -> list[SearchHit]:
        with self._lock:
            return self._index.search(q, lambda cid, status: True)

    def facet_counts(self, **filters):
        with self._lock:
            return self._index.facet_counts(lambda cid, status: True, **filters)

    def network_nodes(self) -> list[NodeState]:
        with self._lock:
            return sorted(self.registry.values(), key=lambda n: n.node_id)

    def projection(self) -> dict:
        """Per-node view of consolidated live data, for equality checks."""
        with self._lock:
            out = {}
            for node_id in sorted(self.data):
                data = self.data[node_id]
                collections = {}
                for cid, meta in data.collections.items():
                    entries = {
                        eid: entry_to_dict(rec["entry"])
                        for eid, rec in data.entries.items()
                        if rec["collection_id"] == cid
                    }
                    collections[cid] = {"meta": dict(meta), "entries": entries}
                if collections:
                    out[node_id] = collections
            return out

    def snapshot_bytes(self) -> bytes:
        """Canonical bytes of everything durable except contact times."""
        with self._lock:
            doc = {"nodes": {}}
            for node_id in sorted(self.registry):
                state = self.registry[node_id]
                data = self.data.get(node_id, _NodeData())
                doc["nodes"][node_id] = {
                    "display_name": state.display_name,
                    "last_applied_seq": state.last_applied_seq,
                    "collections": data.collections,
                    "collection_revisions": data.collection_revisions,
                    "collection_tombstones": data.collection_tombstones,
                    "entries": {
                        eid: {k: rec[k] for k in ("collection_id", "revision", "at", "tbx")}
                        for eid, rec in data.entries.items()
                    },
                    "entry_tombstones": data.entry_tombstones,
                }
            return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


SYNC_IDLE_WAIT = 60.0


class SyncWorker:
    """Background pusher: drains the node journal into the central.

    One instance per node process.  It wakes on a timer and whenever the
    store appends to the journal, then pushes batches until caught up.
    Central being down is routine: errors are logged and retried on the
    next round, never raised out of the loop.
    """

    def __init__(
        self,
        store,
        node_id: str,
        endpoint: str,
        token: str,
        transport: Transport,
        *,
        interval: float = SYNC_IDLE_WAIT,
        max_changes: int = 200,
        on_event: Optional[Callable[[dict], None]] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.store = store
        self.node_id = node_id
        self.endpoint = endpoint
        self.token = token
        self.transport = transport
        self.interval = interval
        self.max_changes = max_changes
        self.on_event = on_event or (lambda event: None)
        self.sleep = sleep
        self._wake = threading.Event()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def wake(self) -> None:
        self._wake.set()

    def stop(self) -> None:
        self._stop.set()
        self._wake.set()
        if self._thread is not None:
            self._thread.join(timeout=10)

    def start(self) -> None:
        self._thread = threading.Thread(target=self.run, name="sync-worker", daemon=True)
        self._thread.start()

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                self.sync_once()
            except Exception as exc:  # the loop must outlive any one failure
                self.on_event({"event": "sync_error", "error": str(exc)})
            self._wake.wait(self.interval)
            self._wake.clear()

    def sync_once(self) -> int:
        """Push until caught up; returns how many records were acked."""
        acked = 0
        stalls = 0
        while True:
            cursor = self.store.sync_cursor
            batch = build_sync_batch(self.store.journal_snapshot(), cursor, self.max_changes)
            if batch is None:
                return acked
            batch.node_id = self.node_id
            ack = push_batch(self.endpoint, batch, self.token, self.transport, sleep=self.sleep)
            if ack.status is AckStatus.OK:
                if ack.last_applied_seq > cursor:
                    acked += ack.last_applied_seq - cursor
                    self.store.set_sync_cursor(ack.last_applied_seq)
                    stalls = 0
                else:
                    stalls += 1
            elif ack.status is AckStatus.OUT_OF_ORDER:
                # The central told us where it really is; resend from there.
                self.store.set_sync_cursor(ack.last_applied_seq)
                stalls += 1
            else:
                self.on_event({"event": "sync_rejected", "status": ack.status.value})
                raise TransportError(f"central rejected batch: {ack.status.value}")
            if stalls >= 3:
                raise TransportError("sync is not making progress")
