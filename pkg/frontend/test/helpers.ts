// Shared test plumbing: a recording fake server behind the ApiClient's
// injectable fetch, plus a DOM mount helper.

import { FetchLike } from "../src/api";

export type RecordedCall = {
  method: string;
  url: string;
  path: string;
  headers: Record<string, string>;
  body: string | null;
};

type Reply = [number, unknown];
type Handler = (call: RecordedCall) => Reply | Promise<Reply>;

function escapeRegex(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

export class FakeServer {
  calls: RecordedCall[] = [];
  private handlers: Array<{ method: string; pattern: RegExp; handler: Handler }> = [];

  on(method: string, pattern: string | RegExp, reply: Reply | Handler): void {
    const regex =
      typeof pattern === "string" ? new RegExp(`^${escapeRegex(pattern)}(\\?.*)?$`) : pattern;
    const handler = typeof reply === "function" ? reply : () => reply;
    this.handlers.push({ method, pattern: regex, handler });
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const call: RecordedCall = {
      method,
      url,
      path,
      headers: { ...((init?.headers ?? {}) as Record<string, string>) },
      body: typeof init?.body === "string" ? init.body : null,
    };
    this.calls.push(call);
    for (const route of this.handlers) {
      if (route.method === method && route.pattern.test(path)) {
        const [status, doc] = await route.handler(call);
        if (typeof doc === "string") {
          return new Response(doc, { status, headers: { "content-type": "text/plain" } });
        }
        return new Response(JSON.stringify(doc), {
          status,
          headers: { "content-type": "application/json" },
        });
      }
    }
    return new Response(
      JSON.stringify({
        http_status: 404,
        code: "NOT_FOUND",
        message: `no fake route for ${method} ${path}`,
      }),
      { status: 404, headers: { "content-type": "application/json" } },
    );
  };

  callsTo(method: string, pathPrefix: string): RecordedCall[] {
    return this.calls.filter((c) => c.method === method && c.path.startsWith(pathPrefix));
  }

  lastBody(method: string, pathPrefix: string): unknown {
    const matching = this.callsTo(method, pathPrefix);
    const last = matching[matching.length - 1];
    if (!last || last.body === null) return undefined;
    return JSON.parse(last.body);
  }
}

export function mount(): HTMLElement {
  const container = document.createElement("div");
  document.body.appendChild(container);
  return container;
}

/** Let pending promise chains (fake fetch handlers) settle. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export const apiError = (status: number, code: string, message: string): [number, unknown] => [
  status,
  { http_status: status, code, message },
];
