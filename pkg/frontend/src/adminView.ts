// Collection administration: create collections, toggle visibility, import
// and export documents. Controls that need the admin role are simply not
// rendered for lower roles; the server would refuse them anyway.

import { ApiClient, ApiFailure, Collection, ImportReport } from "./api";
import { clear, el, option, showError } from "./dom";
import { atLeast, Role } from "./state";

export type AdminDeps = {
  api: ApiClient;
  role: Role | null;
  group: string | null;
  onChanged?: () => void;
};

const VISIBILITIES = ["private", "group", "public"];
const FORMATS = ["tbx", "csv"];

export function renderAdminView(
  root: HTMLElement,
  collections: Collection[],
  deps: AdminDeps,
): void {
  clear(root);
  root.className = "admin-view";
  const isAdmin = atLeast(deps.role, "admin");
  const canImport = atLeast(deps.role, "contributor");

  const table = el("table", { class: "collection-table" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "Collection"),
      el("th", {}, "Languages"),
      el("th", {}, "Visibility"),
      el("th", {}, "Tools"),
    ),
  );
  for (const collection of collections) {
    table.append(collectionRow(collection));
  }
  root.append(table);

  if (isAdmin) {
    root.append(createForm());
  }

  function collectionRow(collection: Collection): HTMLElement {
    const row = el("tr", { class: "collection-row", "data-collection-id": collection.id });
    row.append(
      el("td", { class: "collection-name" }, collection.name),
      el("td", {}, collection.declared_languages.join(", ")),
    );

    const visibilityCell = el("td", { class: "visibility-cell" });
    if (isAdmin) {
      const select = el("select", { class: "visibility-select" });
      for (const value of VISIBILITIES) {
        select.append(option(value, value));
      }
      select.value = collection.visibility;
      select.addEventListener("change", () => {
        void deps.api
          .setVisibility(collection.id, select.value)
          .then(() => deps.onChanged?.())
          .catch((err) => fail(row, err));
      });
      visibilityCell.append(select);
    } else {
      visibilityCell.append(el("span", { class: "visibility-label" }, collection.visibility));
    }
    row.append(visibilityCell);

    const tools = el("td", { class: "tools-cell" });
    if (canImport) {
      tools.append(importControls(collection));
    }
    tools.append(exportControls(collection));
    row.append(tools);
    return row;
  }

  function importControls(collection: Collection): HTMLElement {
    const box = el("span", { class: "import-controls" });
    const formatSelect = el("select", { class: "import-format" });
    for (const format of FORMATS) {
      formatSelect.append(option(format, format));
    }
    formatSelect.value = "tbx";
    const fileInput = el("input", { type: "file", class: "import-file" });
    const button = el("button", { type: "button", class: "import-button" }, "Import");
    const reportSlot = el("span", { class: "import-report-slot" });
    button.addEventListener("click", () => {
      const file = fileInput.files?.[0];
      if (!file) {
        reportSlot.textContent = "Choose a file first.";
        return;
      }
      void file
        .text()
        .then((text) => deps.api.importDocument(collection.id, formatSelect.value, text))
        .then((report) => {
          renderReport(reportSlot, report);
          deps.onChanged?.();
        })
        .catch((err) => fail(reportSlot, err));
    });
    box.append(formatSelect, fileInput, button, reportSlot);
    return box;
  }

  function exportControls(collection: Collection): HTMLElement {
    const box = el("span", { class: "export-controls" });
    for (const format of FORMATS) {
      const link = el(
        "a",
        {
          class: "export-link",
          href: `${deps.api.baseUrl}/api/v1/collections/${collection.id}/export?format=${format}&include_drafts=false`,
          download: `${collection.name}.${format}`,
        },
        `Export ${format}`,
      );
      box.append(link);
    }
    return box;
  }

  function createForm(): HTMLElement {
    const nameInput = el("input", { type: "text", name: "name", placeholder: "Collection name" });
    const langInput = el("input", { type: "text", name: "languages", placeholder: "en, lv" });
    const button = el("button", { type: "submit" }, "Create collection");
    const slot = el("span", { class: "create-slot" });
    const form = el("form", { class: "create-collection" }, nameInput, langInput, button, slot);
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      const declared = langInput.value
        .split(",")
        .map((code) => code.trim())
        .filter((code) => code !== "");
      void deps.api
        .createCollection({
          name: nameInput.value,
          owner_group: deps.group,
          declared_languages: declared,
        })
        .then(() => deps.onChanged?.())
        .catch((err) => fail(slot, err));
    });
    return form;
  }
}

export function renderReport(slot: HTMLElement, report: ImportReport): void {
  clear(slot);
  const summary = el(
    "span",
    { class: "import-report" },
    `created ${report.created}, updated ${report.updated}, skipped ${report.skipped}`,
  );
  slot.append(summary);
  if (report.issues.length > 0) {
    const list = el("ul", { class: "import-issues" });
    for (const issue of report.issues) {
      list.append(el("li", { "data-code": issue.code }, `${issue.code} at ${issue.path}: ${issue.message}`));
    }
    slot.append(list);
  }
}

function fail(slot: HTMLElement, err: unknown): void {
  if (err instanceof ApiFailure) {
    showError(slot, err.error.code, err.error.message);
  } else {
    showError(slot, "NETWORK", err instanceof Error ? err.message : String(err));
  }
}
