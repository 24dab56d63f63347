/**
 * Client-side mirror of the service's scoring pipeline.
 *
 * The scheme editor re-ranks the displayed benchmark on every weight
 * change without issuing a scan, so this module has to reproduce the
 * service's arithmetic exactly: decimal weights handled as exact
 * fractions, the same threshold comparisons, the same competition
 * ranking and tie order. The parity suite pins `buildRanking` against
 * ranking documents produced by the service for identical inputs.
 *
 * Facts are never computed here. Records arrive finished, inside
 * export documents.
 */

import {
  add,
  cmp,
  div,
  eq,
  fromNumber,
  isZero,
  toNumber,
  ZERO,
  type Frac,
} from "./fraction";
import type {
  CheckResultDoc,
  CriterionDoc,
  ExportDoc,
  Light,
  Outcome,
  OutcomeDoc,
  RankingDoc,
  RankingEntryDoc,
  RecordDoc,
  SchemeDoc,
} from "./types";

export const GRADE_UNDEFINED = "–";

function usable(status: string): boolean {
  return status === "success" || status === "failure";
}

/** Structural equality over decoded JSON values. */
export function jsonEqual(a: unknown, b: unknown): boolean {
  if (a === b) return true;
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((x, i) => jsonEqual(x, b[i]));
  }
  if (
    typeof a === "object" && typeof b === "object" &&
    a !== null && b !== null && !Array.isArray(a) && !Array.isArray(b)
  ) {
    const ka = Object.keys(a);
    const kb = Object.keys(b);
    return (
      ka.length === kb.length &&
      ka.every((k) =>
        Object.hasOwn(b, k) &&
        jsonEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]),
      )
    );
  }
  return false;
}

export function evaluateCriterion(
  criterion: CriterionDoc,
  results: Record<string, CheckResultDoc>,
): Outcome {
  const result = results[criterion.check_key];
  const factMissing = result === undefined || result.status === "not_applicable";

  if (criterion.predicate === "absent") {
    if (factMissing) return "satisfied";
    if (usable(result.status)) return "violated";
    return "not_applicable"; // errored: neither proven absent nor present
  }

  if (factMissing || !usable(result.status)) return "not_applicable";
  const value = result.value;
  switch (criterion.predicate) {
    case "equals":
      return jsonEqual(value, criterion.value) ? "satisfied" : "violated";
    case "at_least":
      // integral numbers only; the wire cannot carry a distinct bool-as-int
      if (typeof value !== "number" || !Number.isInteger(value)) {
        return "not_applicable";
      }
      return value >= (criterion.value as number) ? "satisfied" : "violated";
    case "in_set":
      return (criterion.value as unknown[]).some((member) => jsonEqual(value, member))
        ? "satisfied"
        : "violated";
  }
  throw new Error(`unknown predicate ${String(criterion.predicate)}`);
}

export function scoreOutcomes(
  criteria: readonly CriterionDoc[],
  outcomes: readonly Outcome[],
): Frac | null {
  let satisfied = ZERO;
  let decided = ZERO;
  for (let i = 0; i < criteria.length; i++) {
    if (outcomes[i] === "not_applicable") continue;
    const weight = fromNumber(criteria[i]!.weight);
    decided = add(decided, weight);
    if (outcomes[i] === "satisfied") satisfied = add(satisfied, weight);
  }
  if (isZero(decided)) return null;
  return div(satisfied, decided);
}

export function toGrade(score: Frac | null, scheme: SchemeDoc): string {
  if (score === null) return GRADE_UNDEFINED;
  for (let position = 0; position < scheme.grade_thresholds.length; position++) {
    if (cmp(score, fromNumber(scheme.grade_thresholds[position]!)) >= 0) {
      return String(position + 1);
    }
  }
  return String(scheme.grade_thresholds.length + 1);
}

export function toLight(score: Frac | null, scheme: SchemeDoc): Light {
  if (score === null) return "red";
  const [green, yellow] = scheme.light_thresholds;
  if (cmp(score, fromNumber(green!)) >= 0) return "green";
  if (cmp(score, fromNumber(yellow!)) >= 0) return "yellow";
  return "red";
}

export interface SiteRating {
  score: Frac | null;
  scoreFloat: number | null;
  grade: string;
  light: Light;
  flaggedForReview: boolean;
  criteria: OutcomeDoc[];
}

export function rateRecord(scheme: SchemeDoc, record: RecordDoc): SiteRating {
  const outcomes = scheme.criteria.map((c) => evaluateCriterion(c, record.results));
  const score = scoreOutcomes(scheme.criteria, outcomes);
  let grade = toGrade(score, scheme);
  let light = toLight(score, scheme);
  const criticalHit = scheme.criteria.some(
    (c, i) => c.critical && outcomes[i] === "violated",
  );
  if (criticalHit) {
    if (grade === GRADE_UNDEFINED || parseInt(grade, 10) < 5) grade = "5";
    light = "red";
  }
  return {
    score,
    scoreFloat: score === null ? null : toNumber(score),
    grade,
    light,
    flaggedForReview: criticalHit,
    criteria: scheme.criteria.map((c, i) => ({
      check_key: c.check_key,
      outcome: outcomes[i]!,
      weight: c.weight,
      critical: c.critical,
    })),
  };
}

// string comparison by code point, as the service compares tie keys
function cmpText(a: string, b: string): number {
  const ia = a[Symbol.iterator]();
  const ib = b[Symbol.iterator]();
  for (;;) {
    const ra = ia.next();
    const rb = ib.next();
    if (ra.done && rb.done) return 0;
    if (ra.done) return -1;
    if (rb.done) return 1;
    const ca = ra.value.codePointAt(0)!;
    const cb = rb.value.codePointAt(0)!;
    if (ca !== cb) return ca < cb ? -1 : 1;
  }
}

export interface RankInput {
  url: string;
  domain: string;
  score: Frac | null;
}

export interface Ranked extends RankInput {
  rank: number;
}

/**
 * Competition ranking (1, 1, 3): equal scores share a rank, the next
 * distinct score resumes at its list position. Unscored sites all rank
 * after every scored one and share ranks among themselves. Order
 * inside a tie is by registrable domain, then URL.
 */
export function rankSites(entries: readonly RankInput[]): Ranked[] {
  const ordered = [...entries].sort((a, b) => {
    const aUnscored = a.score === null;
    const bUnscored = b.score === null;
    if (aUnscored !== bUnscored) return aUnscored ? 1 : -1;
    if (a.score !== null && b.score !== null) {
      const byScore = cmp(b.score, a.score);
      if (byScore !== 0) return byScore;
    }
    return cmpText(a.domain, b.domain) || cmpText(a.url, b.url);
  });

  const ranked: Ranked[] = [];
  for (let position = 1; position <= ordered.length; position++) {
    const entry = ordered[position - 1]!;
    const previous = ranked[ranked.length - 1];
    const tied =
      previous !== undefined &&
      (previous.score === null
        ? entry.score === null
        : entry.score !== null && eq(previous.score, entry.score));
    ranked.push({ ...entry, rank: tied ? previous.rank : position });
  }
  return ranked;
}

/** Newest record per site, by started_at. */
export function latestRecords(doc: ExportDoc): Map<string, RecordDoc> {
  const latest = new Map<string, RecordDoc>();
  for (const record of doc.records ?? []) {
    const current = latest.get(record.site_url);
    if (current === undefined || record.started_at >= current.started_at) {
      latest.set(record.site_url, record);
    }
  }
  return latest;
}

function declaredAttributes(
  columns: readonly string[],
  attributes: Record<string, string>,
): Record<string, string> {
  const filled: Record<string, string> = {};
  for (const column of columns) filled[column] = attributes[column] ?? "";
  return filled;
}

/**
 * Re-rank an export under a scheme, producing the same document the
 * service's ranking endpoint would emit for that scheme.
 */
export function buildRanking(exportDoc: ExportDoc, scheme: SchemeDoc): RankingDoc {
  const list = exportDoc.list;
  const records = latestRecords(exportDoc);

  const ratings = new Map<string, SiteRating>();
  for (const site of list.sites) {
    const record = records.get(site.url);
    if (record !== undefined) ratings.set(site.url, rateRecord(scheme, record));
  }

  const ranked = rankSites(
    list.sites.map((site) => ({
      url: site.url,
      domain: site.registrable_domain,
      score: ratings.get(site.url)?.score ?? null,
    })),
  );

  const sitesByUrl = new Map(list.sites.map((site) => [site.url, site]));
  const entries: RankingEntryDoc[] = ranked.map((entry) => {
    const site = sitesByUrl.get(entry.url)!;
    const rating = ratings.get(entry.url);
    return {
      rank: entry.rank,
      url: entry.url,
      registrable_domain: entry.domain,
      score: entry.score === null ? null : toNumber(entry.score),
      grade: rating !== undefined ? rating.grade : GRADE_UNDEFINED,
      light: rating !== undefined ? rating.light : "red",
      flagged_for_review: rating !== undefined ? rating.flaggedForReview : false,
      scanned: rating !== undefined,
      attributes: declaredAttributes(list.columns, site.attributes),
    };
  });

  return {
    format_version: "1",
    list_id: list.id,
    list_name: list.name,
    scheme_id: scheme.id,
    scheme_version: scheme.version,
    record_count: ratings.size,
    dataset_digests: { ...(exportDoc.dataset_digests ?? {}) },
    entries,
  };
}
