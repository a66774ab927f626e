"""HTTP surface.

A thin adapter: every route resolves the bearer token to an actor, calls
one store/directory/central operation, and serializes the result. All
business rules live below this layer.

Error contract: domain errors map to a fixed (status, code) table and a
JSON body {http_status, code, message}. Validation failures additionally
carry the issue list. Every response echoes an X-Request-Id header
(client-supplied or generated) which also appears in the request log.
"""

from __future__ import annotations

import json
from dataclasses import replace
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import errors as E
from .model import (
    CollectionMeta,
    Visibility,
    entry_from_dict,
    entry_to_dict,
    new_id,
)
from .node import Runtime
from .search import MatchMode, SearchQuery

MAX_PAGE = 100

ERROR_TABLE = [
    (E.ValidationFailed, 422, "VALIDATION_FAILED"),
    (E.Unauthorized, 403, "UNAUTHORIZED"),
    (E.Unauthenticated, 401, "UNAUTHENTICATED"),
    (E.InvalidCredentials, 401, "INVALID_CREDENTIALS"),
    (E.UnknownCollection, 404, "UNKNOWN_COLLECTION"),
    (E.UnknownEntry, 404, "UNKNOWN_ENTRY"),
    (E.UnknownUser, 404, "UNKNOWN_USER"),
    (E.UnknownGroup, 404, "UNKNOWN_GROUP"),
    (E.UnknownNode, 404, "UNKNOWN_NODE"),
    (E.StaleRevision, 409, "STALE_REVISION"),
    (E.DuplicateName, 409, "DUPLICATE_NAME"),
    (E.DuplicateUser, 409, "DUPLICATE_USER"),
    (E.AlreadyApproved, 409, "ALREADY_APPROVED"),
    (E.InvariantViolation, 409, "INVARIANT_VIOLATION"),
    (E.ParseFailed, 400, "PARSE_FAILED"),
    (E.EmptyBody, 400, "EMPTY_BODY"),
    (E.InvalidQuery, 400, "INVALID_QUERY"),
]


class ApiProblem(Exception):
    """Request-shape errors raised by the adapter itself."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _problem_body(status: int, code: str, message: str, **extra) -> dict:
    body = {"http_status": status, "code": code, "message": message}
    body.update(extra)
    return body


def _map_domain_error(exc: E.TermNodeError) -> JSONResponse:
    for klass, status, code in ERROR_TABLE:
        if isinstance(exc, klass):
            extra = {}
            if isinstance(exc, E.ValidationFailed):
                extra["issues"] = [issue.to_dict() for issue in exc.issues]
            return JSONResponse(
                _problem_body(status, code, str(exc), **extra), status_code=status
            )
    return JSONResponse(
        _problem_body(400, "BAD_REQUEST", str(exc)), status_code=400
    )


def _bearer(request: Request) -> Optional[str]:
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip() or None
    return None


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        raise ApiProblem(400, "BAD_REQUEST", "request body is empty")
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ApiProblem(400, "BAD_REQUEST", "request body is not valid JSON") from None
    if not isinstance(doc, dict):
        raise ApiProblem(400, "BAD_REQUEST", "request body must be a JSON object")
    return doc


def _require_str(doc: dict, key: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str):
        raise ApiProblem(400, "BAD_REQUEST", f"field '{key}' must be a string")
    return value


def _str_list(doc: dict, key: str) -> list:
    value = doc.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ApiProblem(400, "BAD_REQUEST", f"field '{key}' must be a list of strings")
    return value


def _int_param(params, name: str, default: int, floor: int, ceiling: Optional[int] = None) -> int:
    raw = params.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ApiProblem(400, "BAD_REQUEST", f"query parameter '{name}' must be an integer") from None
    value = max(value, floor)
    if ceiling is not None:
        value = min(value, ceiling)
    return value


def _bool_param(params, name: str) -> bool:
    raw = params.get(name)
    if raw is None:
        return False
    low = raw.lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise ApiProblem(400, "BAD_REQUEST", f"query parameter '{name}' must be true or false")


def _set_param(params, name: str) -> Optional[set]:
    values = params.getlist(name)
    return set(values) if values else None


def _collection_dict(coll) -> dict:
    doc = {
        "id": coll.meta.id,
        "name": coll.meta.name,
        "description": coll.meta.description,
        "domains": list(coll.meta.domains),
        "declared_languages": list(coll.meta.declared_languages),
        "visibility": coll.visibility.value,
        "owner_group": coll.owner_group,
        "created_at": coll.created_at,
        "modified_at": coll.modified_at,
    }
    return doc


def _hit_dict(hit) -> dict:
    return {
        "entry_id": hit.entry_id,
        "collection_id": hit.collection_id,
        "matched_term": hit.matched_term,
        "lang": hit.lang,
        "score": hit.score,
        "node_id": hit.node_id,
    }


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None)
    store = runtime.store
    directory = runtime.directory
    central = runtime.central

    def actor_of(request: Request):
        return directory.resolve(_bearer(request))

    def identified(request: Request):
        actor = actor_of(request)
        if actor.is_anonymous:
            raise E.Unauthenticated("this route requires a bearer token")
        return actor

    def central_only():
        if central is None:
            raise ApiProblem(404, "NOT_FOUND", "this instance is not a central")
        return central

    # -- error plumbing --------------------------------------------------

    @app.exception_handler(E.TermNodeError)
    async def _domain_error(request: Request, exc: E.TermNodeError):
        return _map_domain_error(exc)

    @app.exception_handler(ApiProblem)
    async def _api_problem(request: Request, exc: ApiProblem):
        return JSONResponse(
            _problem_body(exc.status, exc.code, exc.message), status_code=exc.status
        )

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "NOT_FOUND", 405: "METHOD_NOT_ALLOWED"}.get(exc.status_code, "HTTP_ERROR")
        return JSONResponse(
            _problem_body(exc.status_code, code, str(exc.detail)),
            status_code=exc.status_code,
        )

    @app.exception_handler(RequestValidationError)
    async def _shape_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            _problem_body(400, "BAD_REQUEST", "malformed request"), status_code=400
        )

    @app.middleware("http")
    async def _request_log(request: Request, call_next):
        rid = request.headers.get("x-request-id") or new_id()
        response = await call_next(request)
        response.headers["X-Request-Id"] = rid
        token = _bearer(request)
        actor_label = "-"
        if token is not None:
            try:
                actor_label = directory.resolve(token).username
            except E.Unauthenticated:
                actor_label = "-"
        status = response.status_code
        level = "error" if status >= 500 else "warn" if status >= 400 else "info"
        runtime.logs.emit(
            level,
            "request",
            request_id=rid,
            actor=actor_label,
            method=request.method,
            route=request.url.path,
            outcome=status,
        )
        return response

    # -- auth ------------------------------------------------------------

    @app.post("/api/v1/auth/token")
    async def auth_token(request: Request):
        doc = await _json_body(request)
        session = directory.authenticate(
            _require_str(doc, "username"), _require_str(doc, "password")
        )
        return {
            "token": session.token,
            "username": session.username,
            "expires_at": session.expires_at,
        }

    # -- search ----------------------------------------------------------

    def _build_query(params) -> SearchQuery:
        mode_raw = params.get("mode", MatchMode.SUBSTRING.value)
        try:
            mode = MatchMode(mode_raw)
        except ValueError:
            raise ApiProblem(
                400, "BAD_REQUEST", "mode must be one of exact, prefix, substring"
            ) from None
        return SearchQuery(
            text=params.get("q", ""),
            mode=mode,
            collection_ids=_set_param(params, "collection"),
            languages=_set_param(params, "lang"),
            domains=_set_param(params, "domain"),
            include_drafts=_bool_param(params, "include_drafts"),
            offset=_int_param(params, "offset", 0, floor=0),
            limit=_int_param(params, "limit", 20, floor=1, ceiling=MAX_PAGE),
        )

    def _run_search(query: SearchQuery, actor):
        if central is not None:
            return central.consolidated_lookup(query)
        return store.search(query, actor)

    @app.get("/api/v1/search")
    async def search(request: Request):
        actor = actor_of(request)
        query = _build_query(request.query_params)
        hits = _run_search(query, actor)
        if hits:
            total = hits[0].total
        elif query.offset == 0:
            total = 0
        else:
            # Page beyond the end: probe the first page for the count.
            probe = _run_search(replace(query, offset=0, limit=1), actor)
            total = probe[0].total if probe else 0
        return {
            "total": total,
            "offset": query.offset,
            "limit": query.limit,
            "hits": [_hit_dict(h) for h in hits],
        }

    @app.get("/api/v1/facets")
    async def facets(request: Request):
        actor = actor_of(request)
        params = request.query_params
        kwargs = {
            "collection_ids": _set_param(params, "collection"),
            "languages": _set_param(params, "lang"),
            "domains": _set_param(params, "domain"),
        }
        if central is not None:
            counts = central.facet_counts(**kwargs)
        else:
            counts = store.facet_counts(actor, **kwargs)
        return {
            "languages": counts.languages,
            "domains": counts.domains,
            "collections": counts.collections,
        }

    # -- collections -----------------------------------------------------

    @app.post("/api/v1/collections")
    async def create_collection(request: Request):
        actor = identified(request)
        doc = await _json_body(request)
        meta = CollectionMeta(
            id=doc.get("id") or new_id(),
            name=_require_str(doc, "name"),
            description=doc.get("description"),
            domains=_str_list(doc, "domains"),
            declared_languages=_str_list(doc, "declared_languages"),
        )
        cid = store.create_collection(meta, _require_str(doc, "owner_group"), actor)
        return _collection_dict(store.get_collection(cid, actor))

    @app.get("/api/v1/collections")
    async def list_collections(request: Request):
        actor = actor_of(request)
        return [_collection_dict(c) for c in store.list_collections(actor)]

    @app.get("/api/v1/collections/{cid}")
    async def get_collection(cid: str, request: Request):
        actor = actor_of(request)
        return _collection_dict(store.get_collection(cid, actor))

    @app.patch("/api/v1/collections/{cid}/visibility")
    async def set_visibility(cid: str, request: Request):
        actor = identified(request)
        doc = await _json_body(request)
        raw = _require_str(doc, "visibility")
        try:
            visibility = Visibility(raw)
        except ValueError:
            raise ApiProblem(
                400, "BAD_REQUEST", "visibility must be one of private, group, public"
            ) from None
        store.set_visibility(cid, visibility, actor)
        return _collection_dict(store.get_collection(cid, actor))

    # -- entries ---------------------------------------------------------

    def _entry_of(doc: dict):
        try:
            return entry_from_dict(doc)
        except (KeyError, ValueError, TypeError):
            raise ApiProblem(400, "BAD_REQUEST", "entry document is malformed") from None

    @app.post("/api/v1/collections/{cid}/entries")
    async def create_entry(cid: str, request: Request):
        actor = identified(request)
        doc = await _json_body(request)
        entry = _entry_of(doc)
        store.upsert_entry(cid, entry, actor, base_revision=entry.revision)
        return entry_to_dict(store.get_entry(cid, entry.id, actor))

    @app.put("/api/v1/collections/{cid}/entries/{eid}")
    async def update_entry(cid: str, eid: str, request: Request):
        actor = identified(request)
        doc = await _json_body(request)
        if doc.get("id") not in (None, eid):
            raise ApiProblem(400, "BAD_REQUEST", "entry id in body does not match the URL")
        doc["id"] = eid
        entry = _entry_of(doc)
        store.upsert_entry(cid, entry, actor, base_revision=entry.revision)
        return entry_to_dict(store.get_entry(cid, eid, actor))

    @app.get("/api/v1/collections/{cid}/entries/{eid}")
    async def get_entry(cid: str, eid: str, request: Request):
        actor = actor_of(request)
        return entry_to_dict(store.get_entry(cid, eid, actor))

    @app.post("/api/v1/collections/{cid}/entries/{eid}/approve")
    async def approve_entry(cid: str, eid: str, request: Request):
        actor = identified(request)
        store.approve_entry(cid, eid, actor)
        return entry_to_dict(store.get_entry(cid, eid, actor))

    @app.delete("/api/v1/collections/{cid}/entries/{eid}")
    async def delete_entry(cid: str, eid: str, request: Request):
        actor = identified(request)
        tomb = store.delete_entry(cid, eid, actor)
        return {"deleted": True, "entry_id": tomb.entry_id, "revision": tomb.revision}

    # -- import / export -------------------------------------------------

    @app.post("/api/v1/collections/{cid}/import")
    async def import_collection(cid: str, request: Request):
        actor = identified(request)
        format = request.query_params.get("format", "")
        document = await request.body()
        report = store.import_collection(cid, format, document, actor)
        return report.to_dict()

    @app.get("/api/v1/collections/{cid}/export")
    async def export_collection(cid: str, request: Request):
        actor = actor_of(request)
        params = request.query_params
        format = params.get("format", "")
        include_drafts = _bool_param(params, "include_drafts")
        data = store.export_collection(cid, format, include_drafts, actor)
        media = "application/xml" if format == "tbx" else "text/csv; charset=utf-8"
        return Response(content=data, media_type=media)

    # -- discussions -----------------------------------------------------

    @app.get("/api/v1/entries/{eid}/comments")
    async def list_comments(eid: str, request: Request):
        actor = actor_of(request)
        return [c.to_dict() for c in store.list_comments(eid, actor)]

    @app.post("/api/v1/entries/{eid}/comments")
    async def post_comment(eid: str, request: Request):
        actor = actor_of(request)
        doc = await _json_body(request)
        body = doc.get("body", "")
        if not isinstance(body, str):
            raise ApiProblem(400, "BAD_REQUEST", "field 'body' must be a string")
        return store.post_comment(eid, body, actor).to_dict()

    # -- federation (central mode) ---------------------------------------

    async def _sync_register(request: Request):
        hub = central_only()
        doc = await _json_body(request)
        status, body = hub.receive_register(doc, _bearer(request) or "")
        if status != 200:
            return JSONResponse(
                _problem_body(
                    status,
                    "UNAUTHENTICATED" if status == 401 else "BAD_REQUEST",
                    body.get("detail", ""),
                ),
                status_code=status,
            )
        return JSONResponse(body)

    async def _sync_batch(request: Request):
        hub = central_only()
        doc = await _json_body(request)
        status, body = hub.receive_batch(doc, _bearer(request) or "")
        if status != 200:
            return JSONResponse(
                _problem_body(
                    status,
                    "UNAUTHENTICATED" if status == 401 else "BAD_REQUEST",
                    body.get("detail", ""),
                ),
                status_code=status,
            )
        return JSONResponse(body)

    # The wire contract names the bare paths; the API prefix aliases them
    # so every route is also reachable under /api/v1.
    app.post("/sync/v1/register")(_sync_register)
    app.post("/api/v1/sync/v1/register")(_sync_register)
    app.post("/sync/v1/batch")(_sync_batch)
    app.post("/api/v1/sync/v1/batch")(_sync_batch)

    @app.get("/api/v1/network/nodes")
    async def network_nodes(request: Request):
        hub = central_only()
        return [
            {
                "node_id": n.node_id,
                "display_name": n.display_name,
                "last_applied_seq": n.last_applied_seq,
                "last_contact_at": n.last_contact_at,
            }
            for n in hub.network_nodes()
        ]

    return app
