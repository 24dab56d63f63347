/**
 * HTTP client for the /api/v1 service.
 *
 * The base URL comes from `window.SITEGRADE_API_BASE` when a deployment
 * sets it at runtime (public/runtime-config.js), falling back to the
 * VITE_API_BASE build variable, falling back to same-origin paths.
 *
 * Every non-2xx response becomes an ApiFailure carrying the error
 * envelope's code and message plus any validation violations and the
 * Retry-After value. Network-level failures become Offline errors and
 * raise the offline banner.
 */

import type {
  CatalogDoc,
  ExportDoc,
  HealthDoc,
  HistoryDoc,
  ListIndexDoc,
  RankingDoc,
  ScanListDoc,
  SchemeDoc,
  SchemeSummary,
  ScanOutcomesDoc,
  SingleScanDoc,
  SiteDetailDoc,
  Violation,
} from "./types";

export class ApiFailure extends Error {
  readonly status: number;
  readonly code: string;
  readonly violations: Violation[];
  readonly retryAfterS: number | null;

  constructor(status: number, code: string, message: string,
              violations: Violation[] = [], retryAfterS: number | null = null) {
    super(message);
    this.status = status;
    this.code = code;
    this.violations = violations;
    this.retryAfterS = retryAfterS;
  }
}

export class Offline extends Error {}

function apiBase(): string {
  const runtime = (globalThis as { SITEGRADE_API_BASE?: string }).SITEGRADE_API_BASE;
  const built = import.meta.env?.VITE_API_BASE as string | undefined;
  return (runtime ?? built ?? "").replace(/\/+$/, "");
}

function notifyNetwork(ok: boolean): void {
  globalThis.dispatchEvent?.(new Event(ok ? "sitegrade:online" : "sitegrade:offline"));
}

interface RequestOptions {
  token?: string | null;
  body?: unknown;
  query?: Record<string, string | undefined>;
}

async function requestRaw(method: string, path: string,
                          options: RequestOptions = {}): Promise<Response> {
  const headers: Record<string, string> = {};
  if (options.body !== undefined) headers["content-type"] = "application/json";
  if (options.token) headers["authorization"] = `Bearer ${options.token}`;

  let url = apiBase() + path;
  if (options.query) {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(options.query)) {
      if (value !== undefined && value !== "") params.set(key, value);
    }
    const text = params.toString();
    if (text) url += `?${text}`;
  }

  let response: Response;
  try {
    response = await fetch(url, {
      method,
      headers,
      body: options.body === undefined ? undefined : JSON.stringify(options.body),
    });
  } catch (exc) {
    notifyNetwork(false);
    throw new Offline(exc instanceof Error ? exc.message : String(exc));
  }
  notifyNetwork(true);
  return response;
}

function retryAfterOf(response: Response): number | null {
  const header = response.headers.get("retry-after");
  if (header === null) return null;
  const seconds = parseInt(header, 10);
  return Number.isFinite(seconds) ? seconds : null;
}

async function failureFrom(response: Response): Promise<ApiFailure> {
  let code = `http_${response.status}`;
  let message = response.statusText || `request failed with ${response.status}`;
  let violations: Violation[] = [];
  try {
    const body = await response.json() as { error?: { code?: string; message?: string; violations?: Violation[] } };
    if (body && typeof body === "object" && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      violations = body.error.violations ?? [];
    }
  } catch {
    // non-JSON error body; keep the HTTP-level description
  }
  return new ApiFailure(response.status, code, message, violations, retryAfterOf(response));
}

async function request<T>(method: string, path: string,
                          options: RequestOptions = {}): Promise<T> {
  const response = await requestRaw(method, path, options);
  if (!response.ok) throw await failureFrom(response);
  if (response.status === 204) return undefined as T;
  return await response.json() as T;
}

// -- meta -------------------------------------------------------------------

export function health(): Promise<HealthDoc> {
  return request("GET", "/healthz");
}

export function catalog(): Promise<CatalogDoc> {
  return request("GET", "/api/v1/catalog");
}

// -- schemes ----------------------------------------------------------------

export function listSchemes(): Promise<{ schemes: SchemeSummary[] }> {
  return request("GET", "/api/v1/schemes");
}

export function getScheme(schemeId: string): Promise<SchemeDoc> {
  return request("GET", `/api/v1/schemes/${encodeURIComponent(schemeId)}`);
}

export function createScheme(doc: SchemeDoc): Promise<SchemeDoc> {
  return request("POST", "/api/v1/schemes", { body: doc });
}

export function updateScheme(doc: SchemeDoc): Promise<SchemeDoc> {
  return request("PUT", `/api/v1/schemes/${encodeURIComponent(doc.id)}`, { body: doc });
}

// -- lists ------------------------------------------------------------------

export function listLists(): Promise<ListIndexDoc> {
  return request("GET", "/api/v1/lists");
}

export function createList(payload: unknown): Promise<ScanListDoc> {
  return request("POST", "/api/v1/lists", { body: payload });
}

export function getList(listId: string, token: string | null): Promise<ScanListDoc> {
  return request("GET", `/api/v1/lists/${encodeURIComponent(listId)}`, { token });
}

export function getExport(listId: string, token: string | null,
                          schemeId?: string): Promise<ExportDoc> {
  return request("GET", `/api/v1/lists/${encodeURIComponent(listId)}/export`,
                 { token, query: { scheme: schemeId } });
}

export function getRanking(listId: string, token: string | null,
                           schemeId?: string): Promise<RankingDoc> {
  return request("GET", `/api/v1/lists/${encodeURIComponent(listId)}/ranking`,
                 { token, query: { scheme: schemeId } });
}

export function getSiteDetail(listId: string, index: number, token: string | null,
                              schemeId?: string): Promise<SiteDetailDoc> {
  return request("GET",
                 `/api/v1/lists/${encodeURIComponent(listId)}/sites/${index}`,
                 { token, query: { scheme: schemeId } });
}

export function getHistory(listId: string, index: number, token: string | null,
                           schemeId?: string): Promise<HistoryDoc> {
  return request("GET",
                 `/api/v1/lists/${encodeURIComponent(listId)}/sites/${index}/history`,
                 { token, query: { scheme: schemeId } });
}

// -- scans ------------------------------------------------------------------

export interface ScanTrigger {
  outcomes: ScanOutcomesDoc;
  throttled: boolean;
  retryAfterS: number | null;
}

/**
 * Ask the service to scan every member of a list now. A fully
 * throttled list answers 429 with the outcome document in the body;
 * that is reported as a throttled trigger, not an error.
 */
export async function triggerListScan(listId: string,
                                      token: string | null): Promise<ScanTrigger> {
  const response = await requestRaw(
    "POST", `/api/v1/lists/${encodeURIComponent(listId)}/scan`, { token });
  if (response.status === 429) {
    const outcomes = await response.json() as ScanOutcomesDoc;
    return { outcomes, throttled: true, retryAfterS: retryAfterOf(response) };
  }
  if (!response.ok) throw await failureFrom(response);
  return { outcomes: await response.json() as ScanOutcomesDoc,
           throttled: false, retryAfterS: null };
}

export function scanSingle(url: string, schemeId?: string): Promise<SingleScanDoc> {
  return request("POST", "/api/v1/scan",
                 { body: { url }, query: { scheme: schemeId } });
}
