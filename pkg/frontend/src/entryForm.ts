// Entry editor: per-language tabs, morphology and usage metadata, media
// links, draft/approved badge. Collecting the form reproduces the loaded
// entry byte for byte when nothing was edited; the server stays the
// authority on validation, and its 422 issues are rendered at the fields
// their paths point to. A 409 on submit opens a merge prompt instead of
// silently overwriting someone else's revision.

import { ApiClient, ApiFailure, LangSection, MediaRef, TermEntry, TermRecord, ValidationIssue } from "./api";
import { clear, el, option } from "./dom";

const TERM_TYPES = ["full_form", "abbreviation", "acronym", "short_form", "variant", "phrase"];
const PARTS_OF_SPEECH = ["noun", "verb", "adjective", "adverb", "proper_noun", "other"];
const GENDERS = ["masculine", "feminine", "neuter", "common"];
const NUMBERS = ["singular", "plural", "dual"];
const REGISTERS = ["neutral", "technical", "colloquial", "legal"];
const CURRENTNESS = ["current", "outdated", "superseded"];
const MEDIA_KINDS = ["image", "video"];

export type EntryFormDeps = {
  api: ApiClient;
  collectionId: string;
  onDirty?: () => void;
  onSaved?: (entry: TermEntry) => void;
};

export type EntryFormHandle = {
  collect: () => TermEntry;
  submit: () => Promise<void>;
  load: (entry: TermEntry) => void;
};

function optStr(value: string): string | null {
  return value === "" ? null : value;
}

function optionalSelect(name: string, values: string[], current: string | null): HTMLSelectElement {
  const select = el("select", { name });
  select.append(option("", "none"));
  for (const value of values) {
    select.append(option(value, value.replace("_", " ")));
  }
  select.value = current ?? "";
  return select;
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  return el("label", { class: "form-field" }, el("span", { class: "field-name" }, text), control);
}

export function renderEntryForm(
  root: HTMLElement,
  entry: TermEntry,
  deps: EntryFormDeps,
): EntryFormHandle {
  // Fields the form does not edit are carried over from the loaded entry,
  // so a submit always sends the full record based on its revision.
  let base = entry;

  function termFieldset(rec: TermRecord): HTMLElement {
    const fs = el("fieldset", { class: "term-record" });
    const termInput = el("input", { type: "text", name: "term", value: rec.term });
    fs.append(labelled("Term", termInput));

    const morphology = el("div", { class: "morphology-section" });
    morphology.append(
      labelled("Part of speech", optionalSelect("part_of_speech", PARTS_OF_SPEECH, rec.part_of_speech)),
      labelled("Number", optionalSelect("grammatical_number", NUMBERS, rec.grammatical_number)),
      labelled("Gender", optionalSelect("grammatical_gender", GENDERS, rec.grammatical_gender)),
    );
    const usage = el("div", { class: "usage-section" });
    const typeSelect = el("select", { name: "term_type" });
    for (const value of TERM_TYPES) {
      typeSelect.append(option(value, value.replace("_", " ")));
    }
    typeSelect.value = rec.term_type;
    usage.append(
      labelled("Register", optionalSelect("register", REGISTERS, rec.register)),
      labelled("Type", typeSelect),
      labelled("Currentness", optionalSelect("currentness", CURRENTNESS, rec.currentness)),
      labelled("Source", el("input", { type: "text", name: "source", value: rec.source ?? "" })),
      labelled(
        "Usage example",
        el("input", { type: "text", name: "usage_example", value: rec.usage_example ?? "" }),
      ),
    );
    const remove = el("button", { type: "button", class: "remove-term" }, "Remove term");
    remove.addEventListener("click", () => {
      fs.remove();
      markDirty();
    });
    fs.append(morphology, usage, remove);
    return fs;
  }

  function langPanel(section: LangSection): HTMLElement {
    const panel = el("section", { class: "lang-panel", "data-lang": section.lang });
    panel.append(
      labelled(
        `Definition (${section.lang})`,
        el("textarea", { name: "lang_definition" }, section.definition ?? ""),
      ),
    );
    const termsBox = el("div", { class: "terms-box" });
    for (const rec of section.terms) {
      termsBox.append(termFieldset(rec));
    }
    const addTerm = el("button", { type: "button", class: "add-term" }, "Add term");
    addTerm.addEventListener("click", () => {
      termsBox.append(
        termFieldset({
          term: "",
          term_type: "full_form",
          part_of_speech: null,
          grammatical_gender: null,
          grammatical_number: null,
          register: null,
          currentness: null,
          usage_example: null,
          source: null,
        }),
      );
      markDirty();
    });
    panel.append(termsBox, addTerm);
    return panel;
  }

  function mediaRow(media: MediaRef): HTMLElement {
    const row = el("div", { class: "media-row" });
    const kindSelect = el("select", { name: "media_kind" });
    for (const value of MEDIA_KINDS) {
      kindSelect.append(option(value, value));
    }
    kindSelect.value = media.kind;
    row.append(
      labelled("URL", el("input", { type: "text", name: "media_url", value: media.url })),
      labelled("Kind", kindSelect),
      labelled("Caption", el("input", { type: "text", name: "media_caption", value: media.caption ?? "" })),
    );
    const remove = el("button", { type: "button", class: "remove-media" }, "Remove");
    remove.addEventListener("click", () => {
      row.remove();
      markDirty();
    });
    row.append(remove);
    return row;
  }

  function subjectRow(label: string): HTMLElement {
    const row = el("span", { class: "subject-row" });
    row.append(el("input", { type: "text", name: "subject_field", value: label }));
    const remove = el("button", { type: "button", class: "remove-subject" }, "×");
    remove.addEventListener("click", () => {
      row.remove();
      markDirty();
    });
    row.append(remove);
    return row;
  }

  function activateTab(lang: string): void {
    for (const panel of root.querySelectorAll<HTMLElement>(".lang-panel")) {
      panel.classList.toggle("hidden", panel.dataset["lang"] !== lang);
    }
    for (const tab of root.querySelectorAll<HTMLElement>(".lang-tab")) {
      tab.classList.toggle("active", tab.dataset["tabLang"] === lang);
    }
  }

  function render(current: TermEntry): void {
    base = current;
    clear(root);
    root.className = "entry-form-view";

    const badge = el(
      "span",
      { class: `status-badge ${current.workflow_status}` },
      current.workflow_status,
    );
    root.append(
      el(
        "header",
        { class: "entry-header" },
        badge,
        el("span", { class: "entry-id" }, current.id),
        el("span", { class: "entry-revision" }, `rev ${current.revision}`),
      ),
    );

    const form = el("form", { class: "entry-form" });

    const concept = el("section", { class: "concept-section" });
    concept.append(
      labelled("Definition", el("textarea", { name: "definition" }, current.definition ?? "")),
    );
    const subjectBox = el("div", { class: "subject-box" });
    for (const label of current.subject_fields) {
      subjectBox.append(subjectRow(label));
    }
    const addSubject = el("button", { type: "button", class: "add-subject" }, "Add domain");
    addSubject.addEventListener("click", () => {
      subjectBox.append(subjectRow(""));
      markDirty();
    });
    concept.append(labelled("Domains", subjectBox), addSubject);
    form.append(concept);

    const tabBar = el("nav", { class: "lang-tabs" });
    const panels = el("div", { class: "lang-panels" });
    const addTab = (lang: string) => {
      const tab = el("button", { type: "button", class: "lang-tab", "data-tab-lang": lang }, lang);
      tab.addEventListener("click", () => activateTab(lang));
      tabBar.append(tab);
    };
    for (const section of current.lang_sections) {
      addTab(section.lang);
      panels.append(langPanel(section));
    }
    const newLangInput = el("input", {
      type: "text",
      name: "new_lang",
      class: "new-lang",
      placeholder: "lang code",
    });
    const addLang = el("button", { type: "button", class: "add-lang" }, "Add language");
    addLang.addEventListener("click", () => {
      const lang = newLangInput.value.trim().toLowerCase();
      if (!lang) return;
      newLangInput.value = "";
      addTab(lang);
      panels.append(langPanel({ lang, definition: null, terms: [] }));
      activateTab(lang);
      markDirty();
    });
    form.append(tabBar, panels, el("div", { class: "add-lang-row" }, newLangInput, addLang));

    const mediaSection = el("section", { class: "media-section" });
    const mediaBox = el("div", { class: "media-box" });
    for (const media of current.media) {
      mediaBox.append(mediaRow(media));
    }
    const addMedia = el("button", { type: "button", class: "add-media" }, "Add media link");
    addMedia.addEventListener("click", () => {
      mediaBox.append(mediaRow({ url: "", kind: "image", caption: null }));
      markDirty();
    });
    mediaSection.append(labelled("Media", mediaBox), addMedia);
    form.append(mediaSection);

    const submitButton = el("button", { type: "submit", class: "save-entry" }, "Save entry");
    form.append(submitButton, el("div", { class: "form-messages" }));
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      void submit();
    });
    form.addEventListener("input", markDirty);
    root.append(form);

    const first = current.lang_sections[0];
    if (first) activateTab(first.lang);
  }

  function markDirty(): void {
    deps.onDirty?.();
  }

  function collect(): TermEntry {
    const read = (scope: Element, name: string): string =>
      scope.querySelector<HTMLInputElement | HTMLSelectElement | HTMLTextAreaElement>(
        `[name="${name}"]`,
      )?.value ?? "";

    const lang_sections: LangSection[] = [];
    for (const panel of root.querySelectorAll<HTMLElement>(".lang-panel")) {
      const terms: TermRecord[] = [];
      for (const fs of panel.querySelectorAll("fieldset.term-record")) {
        terms.push({
          term: read(fs, "term"),
          term_type: read(fs, "term_type"),
          part_of_speech: optStr(read(fs, "part_of_speech")),
          grammatical_gender: optStr(read(fs, "grammatical_gender")),
          grammatical_number: optStr(read(fs, "grammatical_number")),
          register: optStr(read(fs, "register")),
          currentness: optStr(read(fs, "currentness")),
          usage_example: optStr(read(fs, "usage_example")),
          source: optStr(read(fs, "source")),
        });
      }
      lang_sections.push({
        lang: panel.dataset["lang"] ?? "",
        definition: optStr(read(panel, "lang_definition")),
        terms,
      });
    }

    const media: MediaRef[] = [];
    for (const row of root.querySelectorAll(".media-row")) {
      media.push({
        url: read(row, "media_url"),
        kind: read(row, "media_kind"),
        caption: optStr(read(row, "media_caption")),
      });
    }

    const subject_fields = Array.from(
      root.querySelectorAll<HTMLInputElement>('input[name="subject_field"]'),
    )
      .map((input) => input.value)
      .filter((value) => value !== "");

    const conceptDefinition =
      root.querySelector<HTMLTextAreaElement>('textarea[name="definition"]')?.value ?? "";

    return {
      id: base.id,
      subject_fields,
      definition: optStr(conceptDefinition),
      lang_sections,
      media,
      workflow_status: base.workflow_status,
      revision: base.revision,
      modified_at: base.modified_at,
      modified_by: base.modified_by,
      extras: base.extras,
    };
  }

  function messageArea(): HTMLElement {
    return root.querySelector<HTMLElement>(".form-messages") ?? root;
  }

  function clearIssues(): void {
    for (const marked of root.querySelectorAll(".field-error")) {
      marked.classList.remove("field-error");
    }
    for (const msg of root.querySelectorAll(".field-error-message, .merge-prompt")) {
      msg.remove();
    }
    clear(messageArea());
  }

  function fieldForIssue(path: string): Element | null {
    const tail = path.replace(/^entry\/[^/]+\/?/, "");
    if (tail === "" ) return null;
    const segments = tail.split("/");
    if (segments[0] === "definition") {
      return root.querySelector('textarea[name="definition"]');
    }
    if (segments[0] === "subject_field") {
      return root.querySelector(".subject-box");
    }
    if (segments[0] === "media") {
      const row = root.querySelectorAll(".media-row")[Number(segments[1])];
      if (!row) return null;
      return segments[2] === "kind" ? row.querySelector('[name="media_kind"]') : row;
    }
    if (segments[0] !== "lang") return null;
    const code = (segments[1] ?? "").toLowerCase();
    const panel = Array.from(root.querySelectorAll<HTMLElement>(".lang-panel")).find(
      (p) => (p.dataset["lang"] ?? "").toLowerCase() === code,
    );
    if (!panel) return null;
    if (segments[2] !== "term") {
      return panel.querySelector('textarea[name="lang_definition"]') ?? panel;
    }
    const fs = panel.querySelectorAll("fieldset.term-record")[Number(segments[3])];
    if (!fs) return panel;
    const field = segments[4];
    if (field) {
      return fs.querySelector(`[name="${field}"]`) ?? fs;
    }
    return fs.querySelector('input[name="term"]') ?? fs;
  }

  function renderIssues(issues: ValidationIssue[]): void {
    const unplaced: ValidationIssue[] = [];
    for (const issue of issues) {
      const target = fieldForIssue(issue.path);
      if (!target) {
        unplaced.push(issue);
        continue;
      }
      target.classList.add("field-error");
      target.insertAdjacentElement(
        "afterend",
        el("p", { class: "field-error-message", "data-code": issue.code }, issue.message),
      );
      const panel = target.closest<HTMLElement>(".lang-panel");
      if (panel?.dataset["lang"]) activateTab(panel.dataset["lang"]);
    }
    if (unplaced.length > 0) {
      const list = el("ul", { class: "issue-list" });
      for (const issue of unplaced) {
        list.append(el("li", { "data-code": issue.code }, `${issue.code}: ${issue.message}`));
      }
      messageArea().append(list);
    }
  }

  function renderMergePrompt(failure: ApiFailure): void {
    const prompt = el(
      "div",
      { class: "merge-prompt", role: "alertdialog" },
      el("p", {}, failure.error.message),
      el(
        "p",
        {},
        "The entry changed on the server while you were editing. Load the server copy to rebase your changes, or keep editing and save again.",
      ),
    );
    const reload = el("button", { type: "button", class: "load-server-copy" }, "Load server copy");
    reload.addEventListener("click", () => {
      void deps.api.getEntry(deps.collectionId, base.id).then((latest) => render(latest));
    });
    const dismiss = el("button", { type: "button", class: "keep-editing" }, "Keep editing");
    dismiss.addEventListener("click", () => prompt.remove());
    prompt.append(reload, dismiss);
    messageArea().append(prompt);
  }

  async function submit(): Promise<void> {
    clearIssues();
    const payload = collect();
    try {
      const saved = await deps.api.putEntry(deps.collectionId, payload);
      render(saved);
      deps.onSaved?.(saved);
    } catch (err) {
      if (err instanceof ApiFailure) {
        if (err.status === 409) {
          renderMergePrompt(err);
          return;
        }
        if (err.status === 422 && err.error.issues) {
          renderIssues(err.error.issues);
          return;
        }
        messageArea().append(
          el("div", { class: "error-state", role: "alert" }, `${err.error.code}: ${err.error.message}`),
        );
        return;
      }
      messageArea().append(
        el("div", { class: "error-state", role: "alert" }, err instanceof Error ? err.message : String(err)),
      );
    }
  }

  render(entry);
  return { collect, submit, load: render };
}
