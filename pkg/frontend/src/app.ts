// Application shell: login, view switching, and the glue between views.
// The base URL comes from a single global so the bundle can be served by
// any static file server next to (or apart from) the node.

import { ApiClient, ApiFailure, SearchHit } from "./api";
import { clear, el, option, showError } from "./dom";
import { renderAdminView } from "./adminView";
import { renderDiscussionView } from "./discussionView";
import { renderEntryForm } from "./entryForm";
import { renderSearchView } from "./searchView";
import { Role, ROLE_ORDER, ViewName, ViewState } from "./state";

declare global {
  interface Window {
    __TERMNODE_BASE__?: string;
  }
}

export function startApp(root: HTMLElement): void {
  const api = new ApiClient(window.__TERMNODE_BASE__ ?? "");
  const state = new ViewState();

  const nav = el("nav", { class: "app-nav" });
  const main = el("main", { class: "app-main" });
  clear(root);
  root.append(nav, main);

  const views: Array<[ViewName, string]> = [
    ["search", "Search"],
    ["entry_edit", "Entry"],
    ["discussion", "Discussion"],
    ["collection_admin", "Collections"],
  ];
  for (const [view, label] of views) {
    const button = el("button", { type: "button", class: `nav-${view}` }, label);
    button.addEventListener("click", () => {
      if (state.navigate(view)) void show(view);
    });
    nav.append(button);
  }
  const sessionSlot = el("span", { class: "session-slot" });
  nav.append(sessionSlot);

  function renderSessionSlot(): void {
    clear(sessionSlot);
    if (state.session) {
      sessionSlot.append(
        el("span", { class: "session-user" }, `${state.session.username} (${state.session.role})`),
      );
      const logout = el("button", { type: "button", class: "logout" }, "Log out");
      logout.addEventListener("click", () => {
        state.session = null;
        api.token = null;
        renderSessionSlot();
      });
      sessionSlot.append(logout);
    } else {
      const login = el("button", { type: "button", class: "show-login" }, "Log in");
      login.addEventListener("click", () => renderLogin());
      sessionSlot.append(login);
    }
  }

  function renderLogin(): void {
    clear(main);
    const username = el("input", { type: "text", name: "username", placeholder: "username" });
    const password = el("input", { type: "password", name: "password", placeholder: "password" });
    // The API has no profile route; the chosen role only decides which
    // controls are drawn. The server checks the real one on every call.
    const roleSelect = el("select", { name: "role" });
    for (const role of ROLE_ORDER) {
      roleSelect.append(option(role, role));
    }
    roleSelect.value = "reader";
    const slot = el("div", { class: "login-slot" });
    const form = el(
      "form",
      { class: "login-form" },
      username,
      password,
      el("label", {}, "My role: ", roleSelect),
      el("button", { type: "submit" }, "Log in"),
      slot,
    );
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      void api
        .login(username.value, password.value)
        .then((session) => {
          state.session = {
            token: session.token,
            username: session.username,
            role: roleSelect.value as Role,
          };
          renderSessionSlot();
          state.navigate("search");
          void show("search");
        })
        .catch((err) => {
          if (err instanceof ApiFailure) {
            showError(slot, err.error.code, err.error.message);
          } else {
            showError(slot, "NETWORK", err instanceof Error ? err.message : String(err));
          }
        });
    });
    main.append(form);
  }

  async function show(view: ViewName): Promise<void> {
    clear(main);
    if (view === "search") {
      renderSearchView(main, {
        api,
        onAuthRequired: () => renderLogin(),
        onOpenEntry: (hit: SearchHit) => {
          state.currentCollection = hit.collection_id;
          state.currentEntry = hit.entry_id;
          if (state.navigate("entry_edit")) void show("entry_edit");
        },
      });
      return;
    }
    if (view === "entry_edit") {
      const cid = state.currentCollection;
      const eid = state.currentEntry;
      if (!cid || !eid) {
        main.append(el("p", { class: "empty-state" }, "Pick an entry from search first."));
        return;
      }
      try {
        const entry = await api.getEntry(cid, eid);
        renderEntryForm(main, entry, {
          api,
          collectionId: cid,
          onDirty: () => {
            state.dirty = true;
          },
          onSaved: () => {
            state.dirty = false;
          },
        });
      } catch (err) {
        renderFetchFailure(err);
      }
      return;
    }
    if (view === "discussion") {
      const cid = state.currentCollection;
      const eid = state.currentEntry;
      if (!cid || !eid) {
        main.append(el("p", { class: "empty-state" }, "Pick an entry from search first."));
        return;
      }
      try {
        const [entry, comments] = await Promise.all([
          api.getEntry(cid, eid),
          api.listComments(eid),
        ]);
        renderDiscussionView(main, entry, comments, {
          api,
          collectionId: cid,
          role: state.role,
        });
      } catch (err) {
        renderFetchFailure(err);
      }
      return;
    }
    try {
      const collections = await api.listCollections();
      renderAdminView(main, collections, {
        api,
        role: state.role,
        group: null,
        onChanged: () => void show("collection_admin"),
      });
    } catch (err) {
      renderFetchFailure(err);
    }
  }

  function renderFetchFailure(err: unknown): void {
    if (err instanceof ApiFailure) {
      if (err.status === 401) {
        renderLogin();
        return;
      }
      showError(main, err.error.code, err.error.message);
    } else {
      showError(main, "NETWORK", err instanceof Error ? err.message : String(err));
    }
  }

  renderSessionSlot();
  void show("search");
}

const mount = document.querySelector<HTMLElement>("#app");
if (mount) {
  startApp(mount);
}
