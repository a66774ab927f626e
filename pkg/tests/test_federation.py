import hashlib
import json

import pytest

from harness import NodeBox
from termnode.errors import AuthRejected, TransportError
from termnode.federation import (
    Ack,
    AckStatus,
    CentralState,
    ChangeRecord,
    Entity,
    InProcessTransport,
    Op,
    SyncBatch,
    SyncWorker,
    build_sync_batch,
    canonical_changes,
    checksum_of,
    push_batch,
)
from termnode.model import LangSection, TermEntry, TermRecord, WorkflowStatus
from termnode.search import SearchQuery
from termnode.tbx import serialize_entry_fragment


def fragment_record(seq, entry=None, **overrides):
    entry = entry or TermEntry(
        lang_sections=[LangSection(lang="en", terms=[TermRecord(term=f"term {seq}")])],
        workflow_status=WorkflowStatus.APPROVED,
        revision=1,
    )
    fields = {
        "seq": seq,
        "entity": Entity.ENTRY,
        "op": Op.UPSERT,
        "collection_id": "11111111-1111-4111-8111-111111111111",
        "entry_id": entry.id,
        "payload": serialize_entry_fragment(entry),
        "revision": entry.revision,
        "at": "2024-03-01T10:00:00.000Z",
    }
    fields.update(overrides)
    return ChangeRecord(**fields)


def batch_for(node_id, records):
    return SyncBatch(
        node_id=node_id,
        first_seq=records[0].seq,
        last_seq=records[-1].seq,
        changes=records,
        checksum=checksum_of(records),
    )


# -- wire shapes and checksum -------------------------------------------


def test_change_record_wire_round_trip():
    record = fragment_record(7)
    assert ChangeRecord.from_wire(record.to_wire()) == record


def test_delete_record_omits_payload_field():
    record = fragment_record(3, op=Op.DELETE, payload=None)
    wire = record.to_wire()
    assert "payload_tbx" not in wire
    assert ChangeRecord.from_wire(wire) == record


def test_meta_record_omits_entry_id():
    record = fragment_record(
        2, entity=Entity.COLLECTION_META, entry_id=None, payload=b'{"name":"X"}'
    )
    wire = record.to_wire()
    assert "entry_id" not in wire
    assert ChangeRecord.from_wire(wire) == record


def test_checksum_matches_independent_digest():
    record = ChangeRecord(
        seq=1,
        entity=Entity.COLLECTION_META,
        op=Op.DELETE,
        collection_id="abc",
        entry_id=None,
        payload=None,
        revision=4,
        at="2024-03-01T10:00:00.000Z",
    )
    expected_json = (
        '[{"at":"2024-03-01T10:00:00.000Z","collection_id":"abc",'
        '"entity":"collection_meta","op":"delete","revision":4,"seq":1}]'
    )
    assert canonical_changes([record]) == expected_json.encode()
    assert checksum_of([record]) == hashlib.sha256(expected_json.encode()).hexdigest()


def test_checksum_changes_with_content():
    a = [fragment_record(1)]
    b = [fragment_record(1, revision=2)]
    assert checksum_of(a) != checksum_of(b)


# -- batching ------------------------------------------------------------


def test_build_batch_windowing():
    journal = [fragment_record(i) for i in range(1, 6)]
    batch = build_sync_batch(journal, since_seq=2, max_changes=2)
    assert [r.seq for r in batch.changes] == [3, 4]
    assert (batch.first_seq, batch.last_seq) == (3, 4)
    assert batch.checksum == checksum_of(batch.changes)


def test_build_batch_caught_up_returns_none():
    journal = [fragment_record(i) for i in range(1, 4)]
    assert build_sync_batch(journal, since_seq=3, max_changes=10) is None
    assert build_sync_batch([], since_seq=0, max_changes=10) is None


# -- push with retries ---------------------------------------------------


class FlakyTransport:
    def __init__(self, failures, response=None):
        self.failures = failures
        self.calls = 0
        self.response = response or (200, None)

    def post_json(self, url, body, token):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransportError("connection refused")
        status, payload = self.response
        if payload is None:
            payload = {"node_id": body["node_id"], "last_applied_seq": body["last_seq"], "status": "ok"}
        return status, payload


def test_push_retries_with_backoff_then_succeeds():
    transport = FlakyTransport(failures=2)
    naps = []
    batch = batch_for("n1", [fragment_record(1)])
    ack = push_batch("http://central", batch, "tok", transport, sleep=naps.append)
    assert ack.status is AckStatus.OK
    assert transport.calls == 3
    assert naps == [0.5, 1.0]


def test_push_gives_up_after_max_attempts():
    transport = FlakyTransport(failures=99)
    batch = batch_for("n1", [fragment_record(1)])
    with pytest.raises(TransportError):
        push_batch("http://central", batch, "tok", transport, max_attempts=3, sleep=lambda s: None)
    assert transport.calls == 3


def test_push_translates_401_to_auth_rejected():
    transport = FlakyTransport(failures=0, response=(401, {"detail": "bad token"}))
    batch = batch_for("n1", [fragment_record(1)])
    with pytest.raises(AuthRejected):
        push_batch("http://central", batch, "tok", transport, sleep=lambda s: None)


# -- central apply semantics --------------------------------------------


@pytest.fixture
def central():
    return CentralState(admin_token="admin-secret", clock=lambda: "2024-03-01T12:00:00.000Z")


def register(central, node_id="node-a"):
    status, body = central.receive_register(
        {"node_id": node_id, "display_name": "Node A"}, "admin-secret"
    )
    assert status == 200
    return node_id, body["token"]


def test_register_requires_admin_token(central):
    status, body = central.receive_register({"node_id": "n"}, "wrong")
    assert status == 401
    assert "n" not in central.registry


def test_fresh_batch_applies(central):
    node_id, token = register(central)
    records = [fragment_record(i) for i in range(1, 4)]
    status, ack = central.receive_batch(batch_for(node_id, records).to_wire(), token)
    assert status == 200
    assert ack["status"] == "ok"
    assert ack["last_applied_seq"] == 3
    assert len(central.data[node_id].entries) == 3


def test_duplicate_batch_is_idempotent(central):
    node_id, token = register(central)
    records = [fragment_record(i) for i in range(1, 4)]
    wire = batch_for(node_id, records).to_wire()
    central.receive_batch(wire, token)
    before = central.snapshot_bytes()
    status, ack = central.receive_batch(wire, token)
    assert ack["status"] == "ok"
    assert ack["last_applied_seq"] == 3
    assert central.snapshot_bytes() == before


def test_gap_batch_rejected_without_partial_application(central):
    node_id, token = register(central)
    central.receive_batch(batch_for(node_id, [fragment_record(1), fragment_record(2)]).to_wire(), token)
    before = central.snapshot_bytes()
    late = [fragment_record(5), fragment_record(6)]
    status, ack = central.receive_batch(batch_for(node_id, late).to_wire(), token)
    assert ack["status"] == "out_of_order"
    assert ack["last_applied_seq"] == 2
    assert central.snapshot_bytes() == before


def test_overlapping_batch_skips_already_applied(central):
    node_id, token = register(central)
    r1, r2, r3 = [fragment_record(i) for i in range(1, 4)]
    central.receive_batch(batch_for(node_id, [r1, r2]).to_wire(), token)
    status, ack = central.receive_batch(batch_for(node_id, [r2, r3]).to_wire(), token)
    assert ack["status"] == "ok"
    assert ack["last_applied_seq"] == 3
    assert len(central.data[node_id].entries) == 3


def test_checksum_mismatch_applies_nothing(central):
    node_id, token = register(central)
    batch = batch_for(node_id, [fragment_record(1)])
    wire = batch.to_wire()
    wire["checksum"] = "0" * 64
    status, ack = central.receive_batch(wire, token)
    assert (status, ack["status"]) == (200, "checksum_mismatch")
    assert central.data[node_id].entries == {}


def test_unsupported_protocol_version(central):
    node_id, token = register(central)
    wire = batch_for(node_id, [fragment_record(1)]).to_wire()
    wire["protocol_version"] = 99
    status, ack = central.receive_batch(wire, token)
    assert (status, ack["status"]) == (200, "version_unsupported")


def test_token_must_match_node(central):
    node_a, token_a = register(central, "node-a")
    node_b, token_b = register(central, "node-b")
    wire = batch_for(node_a, [fragment_record(1)]).to_wire()
    status, body = central.receive_batch(wire, token_b)
    assert status == 401


def test_unknown_token_is_401(central):
    status, body = central.receive_batch({}, "nonsense")
    assert status == 401


def test_delete_installs_tombstone_and_wins_over_stale_upsert(central):
    node_id, token = register(central)
    entry = TermEntry(
        lang_sections=[LangSection(lang="en", terms=[TermRecord(term="gone")])],
        workflow_status=WorkflowStatus.APPROVED,
        revision=1,
    )
    records = [
        fragment_record(1, entry=entry),
        fragment_record(2, op=Op.DELETE, payload=None, entry_id=entry.id, revision=2),
    ]
    central.receive_batch(batch_for(node_id, records).to_wire(), token)
    data = central.data[node_id]
    assert data.entries == {}
    assert data.entry_tombstones[entry.id] == 2
    assert central.consolidated_lookup(SearchQuery(text="gone")) == []
    # A later upsert with a higher revision revives the entry.
    entry.revision = 3
    revive = fragment_record(3, entry=entry, entry_id=entry.id, revision=3)
    central.receive_batch(batch_for(node_id, [revive]).to_wire(), token)
    assert entry.id in central.data[node_id].entries


def test_lower_revision_never_regresses_state(central):
    node_id, token = register(central)
    entry = TermEntry(
        lang_sections=[LangSection(lang="en", terms=[TermRecord(term="old name")])],
        workflow_status=WorkflowStatus.APPROVED,
        revision=5,
    )
    central.receive_batch(batch_for(node_id, [fragment_record(1, entry=entry, revision=5)]).to_wire(), token)
    stale = TermEntry(
        id=entry.id,
        lang_sections=[LangSection(lang="en", terms=[TermRecord(term="new name")])],
        workflow_status=WorkflowStatus.APPROVED,
        revision=2,
    )
    central.receive_batch(
        batch_for(node_id, [fragment_record(2, entry=stale, entry_id=entry.id, revision=2)]).to_wire(),
        token,
    )
    stored = central.data[node_id].entries[entry.id]
    assert stored["revision"] == 5
    assert central.consolidated_lookup(SearchQuery(text="old name"))


def test_collection_delete_drops_its_entries(central):
    node_id, token = register(central)
    cid = "11111111-1111-4111-8111-111111111111"
    records = [
        fragment_record(
            1,
            entity=Entity.COLLECTION_META,
            entry_id=None,
            payload=json.dumps({"id": cid, "name": "C"}).encode(),
            revision=1,
        ),
        fragment_record(2),
        fragment_record(
            3, entity=Entity.COLLECTION_META, op=Op.DELETE, entry_id=None, payload=None, revision=2
        ),
    ]
    central.receive_batch(batch_for(node_id, records).to_wire(), token)
    data = central.data[node_id]
    assert data.collections == {}
    assert data.entries == {}
    assert central.projection() == {}


def test_nodes_are_isolated(central):
    node_a, token_a = register(central, "node-a")
    node_b, token_b = register(central, "node-b")
    entry = TermEntry(
        lang_sections=[LangSection(lang="en", terms=[TermRecord(term="shared id")])],
        workflow_status=WorkflowStatus.APPROVED,
        revision=1,
    )
    central.receive_batch(batch_for(node_a, [fragment_record(1, entry=entry)]).to_wire(), token_a)
    removal = fragment_record(1, op=Op.DELETE, payload=None, entry_id=entry.id, revision=9)
    central.receive_batch(batch_for(node_b, [removal]).to_wire(), token_b)
    assert entry.id in central.data[node_a].entries
    hits = central.consolidated_lookup(SearchQuery(text="shared id"))
    assert [h.node_id for h in hits] == ["node-a"]


# -- node to central, end-to-end ----------------------------------------


@pytest.fixture
def wired(tmp_path):
    box = NodeBox(tmp_path)
    central = CentralState(admin_token="admin-secret")
    node_id, token = register(central, "node-a")
    worker = SyncWorker(
        box.store,
        node_id,
        "inproc://central",
        token,
        InProcessTransport(central),
        sleep=lambda s: None,
    )
    box.store.add_journal_listener(worker.wake)
    yield box, central, worker
    box.close()


def approved_entry(box, cid, term):
    entry = TermEntry(lang_sections=[LangSection(lang="en", terms=[TermRecord(term=term)])])
    box.store.upsert_entry(cid, entry, box.actor("cora"))
    box.store.approve_entry(cid, entry.id, box.actor("abe"))
    return entry


def test_sync_once_pushes_everything(wired):
    box, central, worker = wired
    cid = box.collection(public=True)
    for i in range(5):
        approved_entry(box, cid, f"term {i}")
    acked = worker.sync_once()
    assert acked == len(box.store.journal_snapshot()) == 6
    assert box.store.sync_cursor == 6
    assert central.projection() == {"node-a": box.store.public_projection()}


def test_sync_is_incremental(wired):
    box, central, worker = wired
    cid = box.collection(public=True)
    approved_entry(box, cid, "first")
    assert worker.sync_once() == 2
    approved_entry(box, cid, "second")
    assert worker.sync_once() == 1
    assert worker.sync_once() == 0
    assert central.projection() == {"node-a": box.store.public_projection()}


def test_deletes_and_demotions_propagate(wired):
    box, central, worker = wired
    cid = box.collection(public=True)
    doomed = approved_entry(box, cid, "doomed")
    demoted = approved_entry(box, cid, "demoted")
    worker.sync_once()
    box.store.delete_entry(cid, doomed.id, box.actor("cora"))
    box.store.upsert_entry(cid, demoted, box.actor("cora"), base_revision=2)
    worker.sync_once()
    assert central.projection() == {"node-a": box.store.public_projection()}
    assert central.data["node-a"].entries == {}


def test_unpublish_propagates(wired):
    box, central, worker = wired
    cid = box.collection(public=True)
    approved_entry(box, cid, "temp")
    worker.sync_once()
    from termnode.model import Visibility

    box.store.set_visibility(cid, Visibility.PRIVATE, box.actor("ada"))
    worker.sync_once()
    assert central.projection() == {}


def test_central_reset_recovery_via_out_of_order(wired):
    box, central, worker = wired
    cid = box.collection(public=True)
    approved_entry(box, cid, "before reset")
    worker.sync_once()
    # Central loses its memory of the node (operator re-registered it).
    token = register(central, "node-a")[1]
    worker.token = token
    approved_entry(box, cid, "after reset")
    acked = worker.sync_once()
    assert central.registry["node-a"].last_applied_seq == len(box.store.journal_snapshot())
    assert central.projection() == {"node-a": box.store.public_projection()}


def test_full_resync_flow(wired):
    box, central, worker = wired
    cid = box.collection(public=True)
    for i in range(3):
        approved_entry(box, cid, f"keep {i}")
    worker.sync_once()
    before = central.projection()
    # Operator resets both sides; the node journal is rebuilt from state.
    worker.token = register(central, "node-a")[1]
    box.store.reset_journal()
    worker.sync_once()
    assert central.projection() == before
    assert central.registry["node-a"].last_applied_seq == len(box.store.journal_snapshot())


def test_worker_survives_central_outage(tmp_path):
    box = NodeBox(tmp_path)
    central = CentralState(admin_token="admin-secret")
    node_id, token = register(central, "node-a")

    class DownThenUp:
        def __init__(self, inner):
            self.inner = inner
            self.down = True

        def post_json(self, url, body, tok):
            if self.down:
                raise TransportError("central unreachable")
            return self.inner.post_json(url, body, tok)

    transport = DownThenUp(InProcessTransport(central))
    worker = SyncWorker(box.store, node_id, "inproc://", token, transport, sleep=lambda s: None)
    cid = box.collection(public=True)
    approved_entry(box, cid, "queued")
    with pytest.raises(TransportError):
        worker.sync_once()
    assert box.store.sync_cursor == 0
    transport.down = False
    worker.sync_once()
    assert central.projection() == {"node-a": box.store.public_projection()}
    box.close()


def test_background_thread_drains_on_wake(tmp_path):
    import time

    box = NodeBox(tmp_path)
    central = CentralState(admin_token="admin-secret")
    node_id, token = register(central, "node-a")
    worker = SyncWorker(
        box.store, node_id, "inproc://", token, InProcessTransport(central), interval=30.0
    )
    box.store.add_journal_listener(worker.wake)
    worker.start()
    try:
        cid = box.collection(public=True)
        approved_entry(box, cid, "pushed by thread")
        deadline = time.time() + 5
        while time.time() < deadline and central.projection() != {
            "node-a": box.store.public_projection()
        }:
            time.sleep(0.01)
        assert central.projection() == {"node-a": box.store.public_projection()}
    finally:
        worker.stop()
        box.close()


# -- central durability --------------------------------------------------


def test_central_state_survives_restart(tmp_path):
    from termnode.storage import EventLog

    path = str(tmp_path / "central.jsonl")
    central = CentralState("admin-secret", log=EventLog(path))
    node_id, token = register(central)
    batch = batch_for(node_id, [fragment_record(1), fragment_record(2)])
    ack = central.apply_batch(batch, central.registry[node_id])
    assert ack.status is AckStatus.OK
    snapshot = central.snapshot_bytes()
    central.log.close()

    reborn = CentralState("admin-secret", log=EventLog(path))
    assert reborn.snapshot_bytes() == snapshot
    assert reborn.node_for_token(token) == node_id
    # Redelivery after the restart is still recognized as already applied.
    again = reborn.apply_batch(batch, reborn.registry[node_id])
    assert again.status is AckStatus.OK
    assert reborn.snapshot_bytes() == snapshot
    reborn.log.close()


def test_central_restart_respects_reregistration_order(tmp_path):
    from termnode.storage import EventLog

    path = str(tmp_path / "central.jsonl")
    central = CentralState("admin-secret", log=EventLog(path))
    node_id, _ = register(central)
    central.apply_batch(
        batch_for(node_id, [fragment_record(1)]), central.registry[node_id]
    )
    # Recovery flow: the operator re-admits the node, resetting its cursor.
    node_id, token2 = register(central)
    assert central.registry[node_id].last_applied_seq == 0
    replayed = batch_for(node_id, [fragment_record(1), fragment_record(2)])
    central.apply_batch(replayed, central.registry[node_id])
    snapshot = central.snapshot_bytes()
    central.log.close()

    reborn = CentralState("admin-secret", log=EventLog(path))
    assert reborn.snapshot_bytes() == snapshot
    assert reborn.node_for_token(token2) == node_id
    assert reborn.registry[node_id].last_applied_seq == 2
    reborn.log.close()
