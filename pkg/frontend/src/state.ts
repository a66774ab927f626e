// Client-side view state. The node does not expose a profile route, so the
// role here is a display hint chosen at login; the server enforces the real
// permissions on every call regardless of what the UI shows.

export type ViewName = "search" | "entry_edit" | "discussion" | "collection_admin";

export type Role = "reader" | "contributor" | "approver" | "admin";

export const ROLE_ORDER: Role[] = ["reader", "contributor", "approver", "admin"];

export function atLeast(role: Role | null, floor: Role): boolean {
  if (role === null) return false;
  return ROLE_ORDER.indexOf(role) >= ROLE_ORDER.indexOf(floor);
}

export type UiSession = {
  token: string;
  username: string;
  role: Role;
};

export class ViewState {
  activeView: ViewName = "search";
  session: UiSession | null = null;
  currentCollection: string | null = null;
  currentEntry: string | null = null;
  /** Set while the entry form holds edits that were not submitted. */
  dirty = false;
  confirmLeave: () => boolean;

  constructor(confirmLeave?: () => boolean) {
    this.confirmLeave = confirmLeave ?? (() => window.confirm("Discard unsaved changes?"));
  }

  /** Switch views; refuses to abandon unsaved edits unless confirmed. */
  navigate(view: ViewName): boolean {
    if (view === this.activeView) return true;
    if (this.dirty && !this.confirmLeave()) {
      return false;
    }
    this.dirty = false;
    this.activeView = view;
    return true;
  }

  get role(): Role | null {
    return this.session?.role ?? null;
  }
}
