import { describe, expect, it } from "vitest";

import { ApiClient, ApiFailure } from "../src/api";
import { apiError, FakeServer } from "./helpers";

describe("ApiClient", () => {
  it("stores the session token and sends it as a bearer header", async () => {
    const server = new FakeServer();
    server.on("POST", "/api/v1/auth/token", [
      200,
      { token: "tok-123", username: "anna", expires_at: "2026-09-01T00:00:00.000Z" },
    ]);
    server.on("GET", "/api/v1/collections", [200, []]);
    const api = new ApiClient("http://node.test", server.fetch);

    const session = await api.login("anna", "pw");
    expect(session.username).toBe("anna");
    await api.listCollections();

    const last = server.calls[server.calls.length - 1]!;
    expect(last.headers["Authorization"]).toBe("Bearer tok-123");
  });

  it("builds search query strings with repeated filter params", async () => {
    const server = new FakeServer();
    server.on("GET", /^\/api\/v1\/search/, [200, { total: 0, offset: 0, limit: 20, hits: [] }]);
    const api = new ApiClient("", server.fetch);

    await api.search({
      q: "datu bāze",
      mode: "prefix",
      lang: ["en", "lv"],
      collection: ["c1"],
      include_drafts: true,
      offset: 40,
      limit: 10,
    });

    const path = server.calls[0]!.path;
    expect(path).toContain("q=datu+b%C4%81ze");
    expect(path).toContain("mode=prefix");
    expect(path).toContain("lang=en");
    expect(path).toContain("lang=lv");
    expect(path).toContain("collection=c1");
    expect(path).toContain("include_drafts=true");
    expect(path).toContain("offset=40");
    expect(path).toContain("limit=10");
  });

  it("raises ApiFailure carrying the structured error body", async () => {
    const server = new FakeServer();
    server.on("GET", /^\/api\/v1\/search/, apiError(400, "INVALID_QUERY", "q must not be blank"));
    const api = new ApiClient("", server.fetch);

    const failure = (await api.search({ q: " " }).catch((err) => err)) as ApiFailure;
    expect(failure).toBeInstanceOf(ApiFailure);
    expect(failure.status).toBe(400);
    expect(failure.error.code).toBe("INVALID_QUERY");
    expect(failure.message).toContain("q must not be blank");
  });

  it("keeps validation issues available on 422 failures", async () => {
    const server = new FakeServer();
    server.on("PUT", /^\/api\/v1\/collections\/c1\/entries\//, [
      422,
      {
        http_status: 422,
        code: "VALIDATION_FAILED",
        message: "entry failed validation",
        issues: [{ severity: "error", code: "EMPTY_TERM", path: "entry/x/lang/en/term/0", message: "term is empty" }],
      },
    ]);
    const api = new ApiClient("", server.fetch);

    const failure = (await api
      .putEntry("c1", { id: "x" } as never)
      .catch((err: ApiFailure) => err)) as ApiFailure;
    expect(failure.error.issues).toHaveLength(1);
    expect(failure.error.issues?.[0]?.code).toBe("EMPTY_TERM");
  });

  it("wraps unstructured error bodies instead of throwing on them", async () => {
    const server = new FakeServer();
    server.on("GET", "/api/v1/collections", [502, "Bad Gateway"]);
    const api = new ApiClient("", server.fetch);

    const failure = (await api.listCollections().catch((err: ApiFailure) => err)) as ApiFailure;
    expect(failure.error.code).toBe("UNEXPECTED_RESPONSE");
    expect(failure.status).toBe(502);
  });

  it("posts import documents with the format's own content type", async () => {
    const server = new FakeServer();
    server.on("POST", /^\/api\/v1\/collections\/c1\/import/, [
      200,
      { created: 1, updated: 0, skipped: 0, issues: [] },
    ]);
    const api = new ApiClient("", server.fetch);

    await api.importDocument("c1", "csv", "id,definition\r\n");
    expect(server.calls[0]!.headers["Content-Type"]).toBe("text/csv");
    expect(server.calls[0]!.body).toBe("id,definition\r\n");

    await api.importDocument("c1", "tbx", "<martif/>");
    expect(server.calls[1]!.headers["Content-Type"]).toBe("application/xml");
  });

  it("returns exported documents as text", async () => {
    const server = new FakeServer();
    server.on("GET", /^\/api\/v1\/collections\/c1\/export/, [200, "<martif type=\"TBX-ETB\"/>"]);
    const api = new ApiClient("", server.fetch);

    const text = await api.exportDocument("c1", "tbx", false);
    expect(text).toContain("TBX-ETB");
    expect(server.calls[0]!.path).toContain("include_drafts=false");
  });
});
