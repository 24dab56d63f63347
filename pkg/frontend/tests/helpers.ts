/** Shared test plumbing: fixture loading and a routable fetch stub. */

import { readFileSync } from "node:fs";
import { vi } from "vitest";

export function loadFixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export interface SeenRequest {
  method: string;
  url: string;
  body: unknown;
}

export type Router = (method: string, url: string, body: unknown) =>
  Response | undefined;

export function jsonResponse(body: unknown, status = 200,
                             headers: Record<string, string> = {}): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json", ...headers },
  });
}

/**
 * Replace global fetch with a router over stubbed responses. Every
 * request is appended to the returned log, so tests can assert exactly
 * which calls a view made. Unrouted requests answer 404 with an error
 * envelope; the code shows up in the view, making gaps easy to spot.
 */
export function installFetch(route: Router): SeenRequest[] {
  const seen: SeenRequest[] = [];
  const stub = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = (init?.method ?? "GET").toUpperCase();
    const body = typeof init?.body === "string"
      ? JSON.parse(init.body) as unknown : undefined;
    seen.push({ method, url, body });
    return route(method, url, body) ?? jsonResponse(
      { error: { code: "unrouted", message: `${method} ${url}` } }, 404);
  });
  vi.stubGlobal("fetch", stub);
  return seen;
}

/** Let pending promise chains (view loads, handlers) settle. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 10; i += 1) await Promise.resolve();
}
