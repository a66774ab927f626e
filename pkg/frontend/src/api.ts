// Typed client for the node's /api/v1 surface. The shapes here mirror the
// server's JSON exactly; nothing is renamed or reshaped on the way through.

export type TermRecord = {
  term: string;
  term_type: string;
  part_of_speech: string | null;
  grammatical_gender: string | null;
  grammatical_number: string | null;
  register: string | null;
  currentness: string | null;
  usage_example: string | null;
  source: string | null;
};

export type LangSection = {
  lang: string;
  definition: string | null;
  terms: TermRecord[];
};

export type MediaRef = {
  url: string;
  kind: string;
  caption: string | null;
};

export type ExtraField = {
  elem: string;
  type: string;
  value: string;
  target: string | null;
};

export type TermEntry = {
  id: string;
  subject_fields: string[];
  definition: string | null;
  lang_sections: LangSection[];
  media: MediaRef[];
  workflow_status: string;
  revision: number;
  modified_at: string;
  modified_by: string;
  extras: ExtraField[];
};

export type Collection = {
  id: string;
  name: string;
  description: string | null;
  domains: string[];
  declared_languages: string[];
  visibility: string;
  owner_group: string;
  created_at: string;
  modified_at: string;
};

export type SearchHit = {
  entry_id: string;
  collection_id: string;
  matched_term: string;
  lang: string;
  score: number;
  node_id: string | null;
};

export type SearchPage = {
  total: number;
  offset: number;
  limit: number;
  hits: SearchHit[];
};

export type Facets = {
  languages: Record<string, number>;
  domains: Record<string, number>;
  collections: Record<string, number>;
};

export type EntryComment = {
  id: string;
  entry_id: string;
  author: string;
  body: string;
  created_at: string;
};

export type ValidationIssue = {
  severity: string;
  code: string;
  path: string;
  message: string;
};

export type ImportReport = {
  created: number;
  updated: number;
  skipped: number;
  issues: ValidationIssue[];
};

export type ApiErrorBody = {
  http_status: number;
  code: string;
  message: string;
  issues?: ValidationIssue[];
};

export type Session = {
  token: string;
  username: string;
  expires_at: string;
};

export type SearchParams = {
  q: string;
  mode?: string;
  collection?: string[];
  lang?: string[];
  domain?: string[];
  include_drafts?: boolean;
  offset?: number;
  limit?: number;
};

/** A non-2xx response, carrying the server's structured error body. */
export class ApiFailure extends Error {
  readonly error: ApiErrorBody;

  constructor(error: ApiErrorBody) {
    super(`${error.code}: ${error.message}`);
    this.name = "ApiFailure";
    this.error = error;
  }

  get status(): number {
    return this.error.http_status;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function searchQueryString(params: SearchParams): string {
  const query = new URLSearchParams();
  query.set("q", params.q);
  if (params.mode) query.set("mode", params.mode);
  for (const cid of params.collection ?? []) query.append("collection", cid);
  for (const lang of params.lang ?? []) query.append("lang", lang);
  for (const domain of params.domain ?? []) query.append("domain", domain);
  if (params.include_drafts) query.set("include_drafts", "true");
  if (params.offset !== undefined) query.set("offset", String(params.offset));
  if (params.limit !== undefined) query.set("limit", String(params.limit));
  return query.toString();
}

export class ApiClient {
  readonly baseUrl: string;
  token: string | null = null;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
    contentType?: string,
  ): Promise<Response> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      if (typeof body === "string") {
        headers["Content-Type"] = contentType ?? "text/plain";
        init.body = body;
      } else {
        headers["Content-Type"] = "application/json";
        init.body = JSON.stringify(body);
      }
    }
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
    if (!response.ok) {
      throw new ApiFailure(await errorBody(response));
    }
    return response;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.request(method, path, body);
    return (await response.json()) as T;
  }

  async login(username: string, password: string): Promise<Session> {
    const session = await this.json<Session>("POST", "/auth/token", { username, password });
    this.token = session.token;
    return session;
  }

  search(params: SearchParams): Promise<SearchPage> {
    return this.json("GET", `/search?${searchQueryString(params)}`);
  }

  facets(params: Omit<SearchParams, "q"> = {}): Promise<Facets> {
    const qs = searchQueryString({ q: "-", ...params });
    const trimmed = qs.replace(/^q=-&?/, "");
    return this.json("GET", trimmed ? `/facets?${trimmed}` : "/facets");
  }

  listCollections(): Promise<Collection[]> {
    return this.json("GET", "/collections");
  }

  getCollection(cid: string): Promise<Collection> {
    return this.json("GET", `/collections/${cid}`);
  }

  createCollection(doc: Record<string, unknown>): Promise<Collection> {
    return this.json("POST", "/collections", doc);
  }

  setVisibility(cid: string, visibility: string): Promise<Collection> {
    return this.json("PATCH", `/collections/${cid}/visibility`, { visibility });
  }

  getEntry(cid: string, eid: string): Promise<TermEntry> {
    return this.json("GET", `/collections/${cid}/entries/${eid}`);
  }

  putEntry(cid: string, entry: TermEntry): Promise<TermEntry> {
    return this.json("PUT", `/collections/${cid}/entries/${entry.id}`, entry);
  }

  createEntry(cid: string, entry: Partial<TermEntry>): Promise<TermEntry> {
    return this.json("POST", `/collections/${cid}/entries`, entry);
  }

  approveEntry(cid: string, eid: string): Promise<TermEntry> {
    return this.json("POST", `/collections/${cid}/entries/${eid}/approve`);
  }

  deleteEntry(cid: string, eid: string): Promise<unknown> {
    return this.json("DELETE", `/collections/${cid}/entries/${eid}`);
  }

  importDocument(cid: string, format: string, document: string): Promise<ImportReport> {
    const contentType = format === "tbx" ? "application/xml" : "text/csv";
    return this.request("POST", `/collections/${cid}/import?format=${format}`, document, contentType)
      .then((response) => response.json() as Promise<ImportReport>);
  }

  async exportDocument(cid: string, format: string, includeDrafts: boolean): Promise<string> {
    const response = await this.request(
      "GET",
      `/collections/${cid}/export?format=${format}&include_drafts=${includeDrafts}`,
    );
    return response.text();
  }

  listComments(eid: string): Promise<EntryComment[]> {
    return this.json("GET", `/entries/${eid}/comments`);
  }

  postComment(eid: string, body: string): Promise<EntryComment> {
    return this.json("POST", `/entries/${eid}/comments`, { body });
  }
}

async function errorBody(response: Response): Promise<ApiErrorBody> {
  try {
    const doc = (await response.json()) as ApiErrorBody;
    if (typeof doc.code === "string" && typeof doc.message === "string") {
      return { ...doc, http_status: response.status };
    }
  } catch {
    // fall through: not a structured error
  }
  return {
    http_status: response.status,
    code: "UNEXPECTED_RESPONSE",
    message: `server answered ${response.status} without a structured error body`,
  };
}
