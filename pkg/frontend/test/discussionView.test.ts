import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, TermEntry } from "../src/api";
import { renderDiscussionView } from "../src/discussionView";
import { Role } from "../src/state";
import { commentFixtures, entryFixtures } from "./fixtures";
import { apiError, FakeServer, flush, mount } from "./helpers";

describe("discussion view", () => {
  let server: FakeServer;
  let api: ApiClient;
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    server = new FakeServer();
    api = new ApiClient("", server.fetch);
    root = mount();
  });

  function draftEntry(): TermEntry {
    return { ...entryFixtures()[0]!, workflow_status: "draft" };
  }

  function show(entry: TermEntry, role: Role | null, extra: Record<string, unknown> = {}) {
    return renderDiscussionView(root, entry, commentFixtures(entry.id), {
      api,
      collectionId: "c1",
      role,
      ...extra,
    });
  }

  it("renders the thread chronologically", () => {
    show(draftEntry(), "reader");
    const bubbles = root.querySelectorAll(".comment-bubble");
    expect(bubbles).toHaveLength(3);
    const authors = Array.from(bubbles).map(
      (b) => b.querySelector(".comment-author")!.textContent,
    );
    expect(authors).toEqual(["ron", "cora", "abe"]);
  });

  it("blocks empty comments before any request is made", () => {
    show(draftEntry(), "contributor");
    root.querySelector<HTMLTextAreaElement>(".comment-input")!.value = "   ";
    root.querySelector("form.post-form")!.dispatchEvent(new Event("submit", { cancelable: true }));

    expect(server.calls).toHaveLength(0);
    expect(root.querySelector(".post-notice")!.textContent).toContain("needs some text");
    expect(root.querySelectorAll(".comment-bubble")).toHaveLength(3);
  });

  it("appends the posted comment to the thread", async () => {
    const entry = draftEntry();
    server.on("POST", `/api/v1/entries/${entry.id}/comments`, (call) => [
      200,
      {
        id: "c-0004",
        entry_id: entry.id,
        author: "cora",
        body: (JSON.parse(call.body!) as { body: string }).body,
        created_at: "2026-02-02T09:00:00.000Z",
      },
    ]);
    show(entry, "contributor");

    root.querySelector<HTMLTextAreaElement>(".comment-input")!.value = "Piekrītu.";
    root.querySelector("form.post-form")!.dispatchEvent(new Event("submit", { cancelable: true }));
    await flush();

    const bubbles = root.querySelectorAll(".comment-bubble");
    expect(bubbles).toHaveLength(4);
    expect(bubbles[3]!.querySelector(".comment-body")!.textContent).toBe("Piekrītu.");
    expect(root.querySelector<HTMLTextAreaElement>(".comment-input")!.value).toBe("");
  });

  it("surfaces a server rejection of the comment inline", async () => {
    const entry = draftEntry();
    server.on(
      "POST",
      `/api/v1/entries/${entry.id}/comments`,
      apiError(403, "UNAUTHORIZED", "reader floor not met"),
    );
    show(entry, "reader");

    root.querySelector<HTMLTextAreaElement>(".comment-input")!.value = "mēģinājums";
    root.querySelector("form.post-form")!.dispatchEvent(new Event("submit", { cancelable: true }));
    await flush();

    expect(root.querySelector(".post-notice")!.textContent).toContain("UNAUTHORIZED");
    expect(root.querySelectorAll(".comment-bubble")).toHaveLength(3);
  });

  it("shows the approve action only to approver-level sessions on drafts", () => {
    show(draftEntry(), "approver");
    expect(root.querySelector(".approve-action")).not.toBeNull();

    document.body.innerHTML = "";
    root = mount();
    show(draftEntry(), "contributor");
    expect(root.querySelector(".approve-action")).toBeNull();

    document.body.innerHTML = "";
    root = mount();
    show(draftEntry(), "reader");
    expect(root.querySelector(".approve-action")).toBeNull();
  });

  it("offers no approve action on an already approved entry", () => {
    const approved = { ...draftEntry(), workflow_status: "approved" };
    show(approved, "admin");
    expect(root.querySelector(".approve-action")).toBeNull();
  });

  it("approves through the API and reports the approved entry back", async () => {
    const entry = draftEntry();
    const onApproved = vi.fn();
    server.on("POST", `/api/v1/collections/c1/entries/${entry.id}/approve`, [
      200,
      { ...entry, workflow_status: "approved", revision: entry.revision + 1 },
    ]);
    show(entry, "approver", { onApproved });

    root.querySelector<HTMLElement>(".approve-action")!.click();
    await flush();

    expect(onApproved).toHaveBeenCalledWith(
      expect.objectContaining({ workflow_status: "approved" }),
    );
  });
});
