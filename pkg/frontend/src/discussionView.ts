// Discussion thread for one entry: chronological comment bubbles, a post
// box, and the approve action for sessions whose role clears the approver
// floor. Empty comments are blocked before any request is made; the server
// enforces the same rule.

import { ApiClient, ApiFailure, EntryComment, TermEntry } from "./api";
import { clear, el } from "./dom";
import { atLeast, Role } from "./state";

export type DiscussionDeps = {
  api: ApiClient;
  collectionId: string;
  role: Role | null;
  onApproved?: (entry: TermEntry) => void;
};

export type DiscussionHandle = {
  refresh: () => Promise<void>;
};

function bubble(comment: EntryComment): HTMLElement {
  return el(
    "article",
    { class: "comment-bubble", "data-comment-id": comment.id },
    el(
      "header",
      { class: "comment-meta" },
      el("strong", { class: "comment-author" }, comment.author),
      el("time", { class: "comment-time" }, comment.created_at),
    ),
    el("p", { class: "comment-body" }, comment.body),
  );
}

export function renderDiscussionView(
  root: HTMLElement,
  entry: TermEntry,
  comments: EntryComment[],
  deps: DiscussionDeps,
): DiscussionHandle {
  clear(root);
  root.className = "discussion-view";

  const header = el(
    "header",
    { class: "discussion-header" },
    el("span", { class: `status-badge ${entry.workflow_status}` }, entry.workflow_status),
    el("span", { class: "entry-id" }, entry.id),
  );
  if (entry.workflow_status === "draft" && atLeast(deps.role, "approver")) {
    const approve = el("button", { type: "button", class: "approve-action" }, "Approve");
    approve.addEventListener("click", () => {
      void deps.api
        .approveEntry(deps.collectionId, entry.id)
        .then((approved) => deps.onApproved?.(approved))
        .catch((err) => showFailure(err));
    });
    header.append(approve);
  }
  root.append(header);

  const thread = el("div", { class: "comment-thread" });
  if (comments.length === 0) {
    thread.append(el("p", { class: "empty-state" }, "No comments yet."));
  }
  for (const comment of comments) {
    thread.append(bubble(comment));
  }
  root.append(thread);

  const textarea = el("textarea", { name: "comment_body", class: "comment-input" });
  const postButton = el("button", { type: "submit", class: "post-comment" }, "Post");
  const notice = el("p", { class: "post-notice" });
  const postForm = el("form", { class: "post-form" }, textarea, postButton, notice);
  root.append(postForm);

  function showFailure(err: unknown): void {
    notice.textContent =
      err instanceof ApiFailure
        ? `${err.error.code}: ${err.error.message}`
        : err instanceof Error
          ? err.message
          : String(err);
    notice.className = "post-notice error-state";
  }

  postForm.addEventListener("submit", (e) => {
    e.preventDefault();
    const body = textarea.value;
    if (!body.trim()) {
      notice.textContent = "A comment needs some text.";
      notice.className = "post-notice error-state";
      return;
    }
    void deps.api
      .postComment(entry.id, body)
      .then((posted) => {
        textarea.value = "";
        notice.textContent = "";
        notice.className = "post-notice";
        const empty = thread.querySelector(".empty-state");
        if (empty) empty.remove();
        thread.append(bubble(posted));
      })
      .catch((err) => showFailure(err));
  });

  async function refresh(): Promise<void> {
    const latest = await deps.api.listComments(entry.id);
    clear(thread);
    if (latest.length === 0) {
      thread.append(el("p", { class: "empty-state" }, "No comments yet."));
    }
    for (const comment of latest) {
      thread.append(bubble(comment));
    }
  }

  return { refresh };
}
