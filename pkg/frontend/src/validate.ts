/**
 * Client-side URL normalization and draft validation.
 *
 * Mirrors the service's rules so the wizard can reject a list before
 * POSTing it and show the same violation codes the service would
 * return. The service stays authoritative: anything accepted here is
 * revalidated on create, and its violations render the same way.
 */

import type { CatalogDoc, Violation } from "./types";

export class MalformedUrlError extends Error {}

const DEFAULT_PORTS: Record<string, number> = { http: 80, https: 443 };

// letters, digits, underscore; hyphen allowed inside a label only
const HOST_LABEL = /^(?!-)[\p{L}\p{N}_-]{1,63}(?<!-)$/u;
const SCHEME_CHARS = /^[A-Za-z0-9+.-]+$/;

interface SplitUrl {
  scheme: string;
  authority: string;
  path: string;
  query: string;
}

// control characters are dropped wherever they appear, as generic URL
// splitters do, so "exa\tmple.com" still parses
function split(candidate: string): SplitUrl {
  candidate = candidate.replace(/[\t\r\n]/g, "");

  let scheme = "";
  const colon = candidate.indexOf(":");
  if (colon > 0 && SCHEME_CHARS.test(candidate.slice(0, colon))) {
    scheme = candidate.slice(0, colon).toLowerCase();
    candidate = candidate.slice(colon + 1);
  }

  let authority = "";
  if (candidate.startsWith("//")) {
    candidate = candidate.slice(2);
    const end = candidate.search(/[/?#]/);
    authority = end === -1 ? candidate : candidate.slice(0, end);
    candidate = end === -1 ? "" : candidate.slice(end);
  }

  const hash = candidate.indexOf("#");
  if (hash !== -1) candidate = candidate.slice(0, hash);
  const mark = candidate.indexOf("?");
  const path = mark === -1 ? candidate : candidate.slice(0, mark);
  const query = mark === -1 ? "" : candidate.slice(mark + 1);
  return { scheme, authority, path, query };
}

function hostPort(authority: string): { host: string; port: number | null } {
  const at = authority.lastIndexOf("@");
  const hostinfo = at === -1 ? authority : authority.slice(at + 1);

  let host: string;
  let portText: string;
  if (hostinfo.startsWith("[")) {
    const close = hostinfo.indexOf("]");
    host = close === -1 ? hostinfo.slice(1) : hostinfo.slice(1, close);
    const rest = close === -1 ? "" : hostinfo.slice(close + 1);
    portText = rest.startsWith(":") ? rest.slice(1) : "";
  } else {
    const colon = hostinfo.indexOf(":");
    host = colon === -1 ? hostinfo : hostinfo.slice(0, colon);
    portText = colon === -1 ? "" : hostinfo.slice(colon + 1);
  }

  let port: number | null = null;
  if (portText !== "") {
    if (!/^\d+$/.test(portText)) {
      throw new MalformedUrlError(`invalid port '${portText}'`);
    }
    port = parseInt(portText, 10);
    if (port > 65535) throw new MalformedUrlError("port out of range 0-65535");
  }
  return { host, port };
}

/**
 * Canonicalize a raw URL the way the service does: https:// assumed
 * when no scheme is given, scheme and host lowercased, default ports
 * dropped, fragment stripped, empty path made "/". Idempotent for any
 * URL it accepts; throws MalformedUrlError otherwise.
 */
export function normalizeUrl(raw: string): string {
  const trimmed = raw.trim();
  if (!trimmed) throw new MalformedUrlError("empty URL");
  const candidate = trimmed.includes("://") ? trimmed : "https://" + trimmed;

  const parts = split(candidate);
  if (parts.scheme !== "http" && parts.scheme !== "https") {
    throw new MalformedUrlError(`unsupported scheme '${parts.scheme}'`);
  }
  const { host: rawHost, port } = hostPort(parts.authority);
  const host = rawHost.toLowerCase().replace(/^\.+/, "").replace(/\.+$/, "");
  if (!host) throw new MalformedUrlError("no host");
  if ([...host].length > 253 || !host.split(".").every((label) => HOST_LABEL.test(label))) {
    throw new MalformedUrlError(`invalid host '${host}'`);
  }

  let netloc = host;
  if (port !== null && port !== DEFAULT_PORTS[parts.scheme]) {
    netloc = `${host}:${port}`;
  }
  const path = parts.path || "/";
  const query = parts.query ? `?${parts.query}` : "";
  return `${parts.scheme}://${netloc}${path}${query}`;
}

/** Hostname of an already-normalized URL. */
export function hostOf(url: string): string {
  return hostPort(split(url).authority).host;
}

export interface SiteDraft {
  url: string;
  attributes: Record<string, string>;
}

export interface ListDraft {
  name: string;
  description: string;
  private: boolean;
  columns: string[];
  sites: SiteDraft[];
  rescan_interval_s: number;
}

function violation(
  code: string,
  field: string,
  message: string,
  siteIndex?: number,
): Violation {
  const v: Violation = { code, field, message };
  if (siteIndex !== undefined) v.site_index = siteIndex;
  return v;
}

/**
 * Every invariant violation in a draft list (empty = valid). Same
 * codes and order as the service's validator. The token requirement
 * for private lists is not checked here: the service mints the token
 * during create, so a draft never carries one.
 */
export function validateScanList(draft: ListDraft): Violation[] {
  const violations: Violation[] = [];
  if (!draft.name.trim()) {
    violations.push(violation("EmptyName", "name", "list name must be non-empty"));
  }
  if (draft.rescan_interval_s < 0) {
    violations.push(violation(
      "NegativeInterval", "rescan_interval_s", "rescan interval must be >= 0"));
  }

  const seenColumns = new Set<string>();
  for (const column of draft.columns) {
    if (!column.trim()) {
      violations.push(violation("EmptyColumn", "columns", "column names must be non-empty"));
    } else if (seenColumns.has(column)) {
      violations.push(violation("DuplicateColumn", "columns", `duplicate column '${column}'`));
    }
    seenColumns.add(column);
  }

  const declared = new Set(draft.columns);
  const seenUrls = new Set<string>();
  draft.sites.forEach((site, index) => {
    let normalized: string;
    try {
      normalized = normalizeUrl(site.url);
    } catch (exc) {
      if (!(exc instanceof MalformedUrlError)) throw exc;
      violations.push(violation("MalformedUrl", "url", exc.message, index));
      return;
    }
    if (normalized !== site.url) {
      violations.push(violation("UnnormalizedUrl", "url", `expected ${normalized}`, index));
    }
    if (seenUrls.has(normalized)) {
      violations.push(violation("DuplicateUrl", "url", `duplicate of ${normalized}`, index));
    }
    seenUrls.add(normalized);

    const extra = Object.keys(site.attributes).filter((k) => !declared.has(k)).sort();
    const missing = [...declared].filter((k) => !(k in site.attributes)).sort();
    if (extra.length) {
      violations.push(violation(
        "UnknownAttribute", "attributes", `undeclared columns: ${extra.join(", ")}`, index));
    }
    if (missing.length) {
      violations.push(violation(
        "MissingAttribute", "attributes", `missing columns: ${missing.join(", ")}`, index));
    }
  });
  return violations;
}

// value checks per predicate, against the declared fact type
function predicateValueError(
  checkKey: string,
  predicate: string,
  value: unknown,
  declared: string,
): string | null {
  const isInt = (v: unknown) => typeof v === "number" && Number.isInteger(v);
  if (predicate === "absent") return null;
  if (predicate === "at_least") {
    if (declared !== "integer" || !isInt(value)) {
      return `${checkKey}: at_least requires an integer fact and value`;
    }
    return null;
  }
  if (predicate === "in_set") {
    if (!Array.isArray(value) || value.length === 0) {
      return `${checkKey}: in_set requires a non-empty list`;
    }
    const member = declared === "string"
      ? (v: unknown) => typeof v === "string"
      : declared === "integer" ? isInt : null;
    if (member === null || !value.every(member)) {
      return `${checkKey}: in_set members must be ${declared}`;
    }
    return null;
  }
  if (predicate === "equals") {
    const ok = {
      "boolean": (v: unknown) => typeof v === "boolean",
      "integer": isInt,
      "string": (v: unknown) => typeof v === "string",
      "string-list": (v: unknown) => Array.isArray(v) && v.every((x) => typeof x === "string"),
    }[declared];
    if (ok === undefined || !ok(value)) {
      return `${checkKey}: equals value must be ${declared}`;
    }
    return null;
  }
  return `unknown predicate '${predicate}'`;
}

export interface SchemeDraft {
  id: string;
  name: string;
  version: number;
  criteria: {
    check_key: string;
    predicate: string;
    value: unknown;
    weight: number;
    critical: boolean;
  }[];
  grade_thresholds: number[];
  light_thresholds: number[];
}

/**
 * Problems that would make the service reject this scheme document
 * (empty = accepted). The catalog supplies declared fact types.
 */
export function validateScheme(draft: SchemeDraft, catalog: CatalogDoc): string[] {
  const errors: string[] = [];
  for (const criterion of draft.criteria) {
    const check = catalog.checks[criterion.check_key];
    if (check === undefined) {
      errors.push(`unknown check key ${criterion.check_key}`);
      continue;
    }
    if (!catalog.predicates.includes(criterion.predicate)) {
      errors.push(`unknown predicate '${criterion.predicate}'`);
      continue;
    }
    if (!(criterion.weight >= 0)) {
      errors.push(`${criterion.check_key}: negative weight`);
    }
    const problem = predicateValueError(
      criterion.check_key, criterion.predicate, criterion.value, check.type);
    if (problem !== null) errors.push(problem);
  }
  if (draft.criteria.length === 0) errors.push("scheme has no criteria");
  else if (!draft.criteria.some((c) => c.weight > 0)) {
    errors.push("at least one criterion weight must be positive");
  }

  if (draft.grade_thresholds.length !== 5 || draft.light_thresholds.length !== 2) {
    errors.push("expected 5 grade thresholds and 2 light thresholds");
  } else {
    for (const seq of [draft.grade_thresholds, draft.light_thresholds]) {
      if (seq.some((x) => !(x > 0 && x < 1))) {
        errors.push("thresholds must lie in (0,1)");
        break;
      }
      if (seq.some((x, i) => i > 0 && seq[i - 1]! <= x)) {
        errors.push("thresholds must be strictly descending");
        break;
      }
    }
  }
  return errors;
}
