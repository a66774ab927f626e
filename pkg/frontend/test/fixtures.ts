// Deterministic entry fixtures in the exact wire shape the node serves.
// Fixture 0 is the minimal shape, fixture 1 exercises every field at once,
// and the rest are seeded-random mixtures in between.

import { EntryComment, LangSection, TermEntry, TermRecord } from "../src/api";

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const LANGS = ["en", "lv", "de", "fr", "lt", "et"];
const DOMAINS = ["informātika", "tieslietas", "medicīna", "enerģētika", "transports"];
const WORDS = [
  "dators",
  "tīkls",
  "serveris",
  "datne",
  "šifrēšana",
  "līgums",
  "spriedums",
  "diagnoze",
  "turbīna",
  "sliede",
  "protokols",
  "atmiņa",
];
const TERM_TYPES = ["full_form", "abbreviation", "acronym", "short_form", "variant", "phrase"];
const POS = ["noun", "verb", "adjective", "adverb", "proper_noun", "other"];
const GENDERS = ["masculine", "feminine", "neuter", "common"];
const NUMBERS = ["singular", "plural", "dual"];
const REGISTERS = ["neutral", "technical", "colloquial", "legal"];
const CURRENTNESS = ["current", "outdated", "superseded"];

function pick<T>(rng: () => number, pool: T[]): T {
  const value = pool[Math.floor(rng() * pool.length)];
  if (value === undefined) throw new Error("empty pool");
  return value;
}

function maybe<T>(rng: () => number, p: number, make: () => T): T | null {
  return rng() < p ? make() : null;
}

function phrase(rng: () => number): string {
  const count = rng() < 0.3 ? 2 : 1;
  const words = [];
  for (let i = 0; i < count; i++) words.push(pick(rng, WORDS));
  return words.join(" ");
}

function fixtureId(index: number): string {
  return `00000000-0000-4000-8000-${String(index).padStart(12, "0")}`;
}

function makeRecord(rng: () => number): TermRecord {
  return {
    term: phrase(rng),
    term_type: pick(rng, TERM_TYPES),
    part_of_speech: maybe(rng, 0.6, () => pick(rng, POS)),
    grammatical_gender: maybe(rng, 0.4, () => pick(rng, GENDERS)),
    grammatical_number: maybe(rng, 0.4, () => pick(rng, NUMBERS)),
    register: maybe(rng, 0.4, () => pick(rng, REGISTERS)),
    currentness: maybe(rng, 0.3, () => pick(rng, CURRENTNESS)),
    usage_example: maybe(rng, 0.3, () => `Piemērs: ${phrase(rng)}.`),
    source: maybe(rng, 0.4, () => `LZA TK ${1990 + Math.floor(rng() * 30)}`),
  };
}

function makeSection(rng: () => number, lang: string): LangSection {
  const terms = [];
  const count = 1 + Math.floor(rng() * 3);
  for (let i = 0; i < count; i++) terms.push(makeRecord(rng));
  return {
    lang,
    definition: maybe(rng, 0.6, () => `Jēdziens, kas apzīmē: ${phrase(rng)}.`),
    terms,
  };
}

function makeEntry(rng: () => number, index: number): TermEntry {
  const langCount = 1 + Math.floor(rng() * 3);
  const langs = [...LANGS].slice(0, langCount);
  const media = [];
  if (rng() < 0.3) {
    media.push({
      url: `https://media.example/term-${index}.png`,
      kind: rng() < 0.8 ? "image" : "video",
      caption: maybe(rng, 0.5, () => phrase(rng)),
    });
  }
  const extras = [];
  if (rng() < 0.25) {
    extras.push({
      elem: "admin",
      type: "annotatedNote",
      value: phrase(rng),
      target: maybe(rng, 0.5, () => fixtureId(99)),
    });
  }
  return {
    id: fixtureId(index),
    subject_fields: rng() < 0.7 ? [pick(rng, DOMAINS)] : [],
    definition: maybe(rng, 0.5, () => `Vispārīga definīcija ${index}.`),
    lang_sections: langs.map((lang) => makeSection(rng, lang)),
    media,
    workflow_status: rng() < 0.5 ? "draft" : "approved",
    revision: 1 + Math.floor(rng() * 9),
    modified_at: `2026-0${1 + (index % 8)}-11T09:${String(10 + (index % 49)).padStart(2, "0")}:00.000Z`,
    modified_by: rng() < 0.5 ? "cora" : "abe",
    extras,
  };
}

export function entryFixtures(count = 20): TermEntry[] {
  const rng = mulberry32(20260825);
  const minimal: TermEntry = {
    id: fixtureId(0),
    subject_fields: [],
    definition: null,
    lang_sections: [
      {
        lang: "lv",
        definition: null,
        terms: [
          {
            term: "dators",
            term_type: "full_form",
            part_of_speech: null,
            grammatical_gender: null,
            grammatical_number: null,
            register: null,
            currentness: null,
            usage_example: null,
            source: null,
          },
        ],
      },
    ],
    media: [],
    workflow_status: "draft",
    revision: 1,
    modified_at: "2026-01-05T08:00:00.000Z",
    modified_by: "cora",
    extras: [],
  };
  const maximal: TermEntry = {
    id: fixtureId(1),
    subject_fields: ["informātika", "enerģētika"],
    definition: "Koncepts ar pilnu metadatu klāstu.",
    lang_sections: ["en", "lv", "de"].map((lang) => ({
      lang,
      definition: `Definition in ${lang}.`,
      terms: [
        {
          term: `primary ${lang}`,
          term_type: "full_form",
          part_of_speech: "noun",
          grammatical_gender: "feminine",
          grammatical_number: "singular",
          register: "technical",
          currentness: "current",
          usage_example: `Usage in ${lang}.`,
          source: "ISO 2382",
        },
        {
          term: `alt ${lang}`,
          term_type: "abbreviation",
          part_of_speech: "other",
          grammatical_gender: null,
          grammatical_number: "plural",
          register: "colloquial",
          currentness: "outdated",
          usage_example: null,
          source: null,
        },
      ],
    })),
    media: [
      { url: "https://media.example/full.png", kind: "image", caption: "diagramma" },
      { url: "https://media.example/full.mp4", kind: "video", caption: null },
    ],
    workflow_status: "approved",
    revision: 7,
    modified_at: "2026-03-20T14:30:00.000Z",
    modified_by: "abe",
    extras: [
      { elem: "descrip", type: "crossReference", value: fixtureId(0), target: fixtureId(0) },
      { elem: "admin", type: "projectSubset", value: "pilot", target: null },
    ],
  };
  const fixtures = [minimal, maximal];
  for (let i = 2; i < count; i++) {
    fixtures.push(makeEntry(rng, i));
  }
  return fixtures;
}

export function commentFixtures(entryId: string): EntryComment[] {
  return [
    {
      id: "c-0001",
      entry_id: entryId,
      author: "ron",
      body: "Vai šis termins nav novecojis?",
      created_at: "2026-02-01T10:00:00.000Z",
    },
    {
      id: "c-0002",
      entry_id: entryId,
      author: "cora",
      body: "LZA TK 2019 to joprojām iesaka.",
      created_at: "2026-02-01T10:05:00.000Z",
    },
    {
      id: "c-0003",
      entry_id: entryId,
      author: "abe",
      body: "Atstājam, apstiprinu.",
      created_at: "2026-02-01T11:00:00.000Z",
    },
  ];
}
