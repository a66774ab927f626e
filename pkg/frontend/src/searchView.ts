// Search view: query box, match-mode select, facet filters, hit list.
// Every server failure renders inline; a 401 hands control to the login flow.

import { ApiClient, ApiFailure, Facets, SearchHit, SearchPage } from "./api";
import { clear, el, option } from "./dom";

export type SearchDeps = {
  api: ApiClient;
  onOpenEntry: (hit: SearchHit) => void;
  onAuthRequired: () => void;
};

const MODES = ["substring", "prefix", "exact"];

type FacetGroup = "lang" | "domain" | "collection";

export function renderSearchView(root: HTMLElement, deps: SearchDeps): { runSearch: () => Promise<void> } {
  clear(root);
  root.className = "search-view";

  const input = el("input", {
    type: "search",
    name: "q",
    class: "search-input",
    placeholder: "Search terms…",
  });
  const modeSelect = el("select", { name: "mode", class: "search-mode" });
  for (const mode of MODES) {
    modeSelect.append(option(mode, mode));
  }
  modeSelect.value = "substring";
  const draftsBox = el("input", { type: "checkbox", name: "include_drafts" });
  const button = el("button", { type: "submit", class: "search-button" }, "Search");
  const form = el(
    "form",
    { class: "search-form" },
    input,
    modeSelect,
    el("label", { class: "drafts-toggle" }, draftsBox, " include drafts"),
    button,
  );

  const facetPanel = el("aside", { class: "facet-panel" });
  const results = el("section", { class: "search-results" });
  root.append(form, el("div", { class: "search-body" }, facetPanel, results));

  const collectionNames = new Map<string, string>();
  let requestSeq = 0;

  const checkedValues = (group: FacetGroup): string[] =>
    Array.from(
      facetPanel.querySelectorAll<HTMLInputElement>(`input[data-facet="${group}"]:checked`),
    ).map((box) => box.value);

  async function runSearch(): Promise<void> {
    const q = input.value.trim();
    if (!q) {
      clear(results);
      results.append(el("p", { class: "empty-state" }, "Type a term to search."));
      return;
    }
    const seq = ++requestSeq;
    const filters = {
      collection: checkedValues("collection"),
      lang: checkedValues("lang"),
      domain: checkedValues("domain"),
    };
    const params = {
      q,
      mode: modeSelect.value,
      include_drafts: draftsBox.checked,
      ...filters,
    };
    try {
      const [page, facets] = await Promise.all([
        deps.api.search(params),
        deps.api.facets(filters),
      ]);
      if (seq !== requestSeq) return; // a newer search superseded this one
      renderFacets(facets);
      renderHits(page);
    } catch (err) {
      if (seq !== requestSeq) return;
      if (err instanceof ApiFailure) {
        if (err.status === 401) {
          deps.onAuthRequired();
          return;
        }
        renderError(err.error.code, err.error.message);
      } else {
        renderError("NETWORK", err instanceof Error ? err.message : String(err));
      }
    }
  }

  function renderError(code: string, message: string): void {
    clear(results);
    results.append(
      el("div", { class: "error-state", role: "alert" }, el("strong", {}, code), ` ${message}`),
    );
  }

  function renderHits(page: SearchPage): void {
    clear(results);
    if (page.hits.length === 0) {
      results.append(el("p", { class: "empty-state" }, "No results."));
      return;
    }
    const list = el("ol", { class: "hit-list", start: String(page.offset + 1) });
    for (const hit of page.hits) {
      list.append(hitRow(hit));
    }
    results.append(
      list,
      el(
        "p",
        { class: "hit-count" },
        `${page.total} result${page.total === 1 ? "" : "s"}`,
      ),
    );
  }

  function hitRow(hit: SearchHit): HTMLElement {
    const badgeLabel = collectionNames.get(hit.collection_id) ?? hit.collection_id;
    const row = el(
      "li",
      { class: "hit-row", "data-entry-id": hit.entry_id },
      el("span", { class: "hit-term" }, hit.matched_term),
      el("span", { class: "hit-lang" }, hit.lang),
      el("span", { class: "collection-badge" }, badgeLabel),
      hit.node_id ? el("span", { class: "node-badge" }, hit.node_id) : null,
    );
    row.addEventListener("click", () => deps.onOpenEntry(hit));
    return row;
  }

  function renderFacets(facets: Facets): void {
    // Rebuilding the panel must not forget which boxes were ticked.
    const kept: Record<FacetGroup, Set<string>> = {
      lang: new Set(checkedValues("lang")),
      domain: new Set(checkedValues("domain")),
      collection: new Set(checkedValues("collection")),
    };
    clear(facetPanel);
    facetPanel.append(
      facetGroup("Languages", "lang", facets.languages, kept, (v) => v),
      facetGroup("Domains", "domain", facets.domains, kept, (v) => v),
      facetGroup("Collections", "collection", facets.collections, kept, (v) =>
        collectionNames.get(v) ?? v,
      ),
    );
  }

  function facetGroup(
    title: string,
    group: FacetGroup,
    counts: Record<string, number>,
    kept: Record<FacetGroup, Set<string>>,
    label: (value: string) => string,
  ): HTMLElement {
    const block = el("fieldset", { class: `facet-group facet-${group}` }, el("legend", {}, title));
    for (const value of Object.keys(counts).sort()) {
      const box = el("input", { type: "checkbox", value, "data-facet": group });
      box.checked = kept[group].has(value);
      box.addEventListener("change", () => void runSearch());
      block.append(
        el("label", { class: "facet-option" }, box, ` ${label(value)} (${counts[value]})`),
      );
    }
    return block;
  }

  form.addEventListener("submit", (e) => {
    e.preventDefault();
    void runSearch();
  });

  // Collection names decorate badges and facet labels; ids remain the
  // fallback, so this lookup failing is cosmetic only.
  void deps.api
    .listCollections()
    .then((collections) => {
      for (const c of collections) collectionNames.set(c.id, c.name);
    })
    .catch(() => undefined);

  clear(results);
  results.append(el("p", { class: "empty-state" }, "Type a term to search."));
  return { runSearch };
}
