/**
 * Client-held state: route parsing, per-list access tokens, and
 * unsaved scheme drafts. Nothing here talks to the network.
 */

import type { SchemeDoc } from "./types";

export interface Route {
  view: string;
  args: string[];
  params: URLSearchParams;
}

/** "#/lists/demo/sites/2?scheme=strict" -> view, args, params. */
export function parseHash(hash: string): Route {
  const cleaned = hash.replace(/^#\/?/, "");
  const mark = cleaned.indexOf("?");
  const pathPart = mark === -1 ? cleaned : cleaned.slice(0, mark);
  const queryPart = mark === -1 ? "" : cleaned.slice(mark + 1);
  const segments = pathPart.split("/").filter(Boolean).map(decodeURIComponent);
  return {
    view: segments[0] ?? "lists",
    args: segments.slice(1),
    params: new URLSearchParams(queryPart),
  };
}

export function navigate(hash: string): void {
  window.location.hash = hash;
}

// access tokens for private lists; session-scoped, never sent anywhere
// except the Authorization header for that list
const tokens = new Map<string, string>();

function storageKey(listId: string): string {
  return `sitegrade.token.${listId}`;
}

export function tokenFor(listId: string): string | null {
  const held = tokens.get(listId);
  if (held !== undefined) return held;
  try {
    return sessionStorage.getItem(storageKey(listId));
  } catch {
    return null;
  }
}

export function rememberToken(listId: string, token: string): void {
  tokens.set(listId, token);
  try {
    sessionStorage.setItem(storageKey(listId), token);
  } catch {
    // storage may be unavailable; the in-memory copy still works
  }
}

export function forgetToken(listId: string): void {
  tokens.delete(listId);
  try {
    sessionStorage.removeItem(storageKey(listId));
  } catch {
    // ignore
  }
}

// scheme drafts being edited against a benchmark, keyed by list id;
// they stay client-side until explicitly saved through the scheme API
const drafts = new Map<string, SchemeDoc>();

export function draftFor(listId: string): SchemeDoc | null {
  return drafts.get(listId) ?? null;
}

export function holdDraft(listId: string, scheme: SchemeDoc): void {
  drafts.set(listId, scheme);
}

export function dropDraft(listId: string): void {
  drafts.delete(listId);
}
