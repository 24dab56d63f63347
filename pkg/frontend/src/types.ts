/** Document shapes as served by the HTTP API. */

export type Status = "success" | "failure" | "error" | "not_applicable";

export interface CheckResultDoc {
  status: Status;
  value: unknown;
  detail: string;
}

export interface RecordDoc {
  site_url: string;
  list_id: string;
  started_at: string;
  finished_at: string;
  results: Record<string, CheckResultDoc>;
  raw_refs: Record<string, string>;
}

export type Predicate = "equals" | "at_least" | "in_set" | "absent";

export interface CriterionDoc {
  check_key: string;
  predicate: Predicate;
  value: unknown;
  weight: number;
  critical: boolean;
}

export interface SchemeDoc {
  id: string;
  name: string;
  version: number;
  criteria: CriterionDoc[];
  grade_thresholds: number[];
  light_thresholds: number[];
}

export interface SiteDoc {
  url: string;
  registrable_domain: string;
  attributes: Record<string, string>;
}

export interface ScanListDoc {
  id: string;
  name: string;
  description: string;
  private: boolean;
  access_token?: string;
  columns: string[];
  sites: SiteDoc[];
  rescan_interval_s: number;
  default_scheme_id: string;
  version?: number;
}

export interface ExportDoc {
  format_version: string;
  list: ScanListDoc;
  list_version: number;
  scheme?: SchemeDoc;
  records: RecordDoc[];
  dataset_digests: Record<string, string>;
}

export type Light = "green" | "yellow" | "red";

export interface RankingEntryDoc {
  rank: number;
  url: string;
  registrable_domain: string;
  score: number | null;
  grade: string;
  light: Light;
  flagged_for_review: boolean;
  scanned: boolean;
  attributes: Record<string, string>;
}

export interface RankingDoc {
  format_version: string;
  list_id: string;
  list_name: string;
  scheme_id: string;
  scheme_version: number;
  record_count: number;
  dataset_digests: Record<string, string>;
  entries: RankingEntryDoc[];
}

export type Outcome = "satisfied" | "violated" | "not_applicable";

export interface OutcomeDoc {
  check_key: string;
  outcome: Outcome;
  weight: number;
  critical: boolean;
}

export interface RatingDoc {
  score: number | null;
  grade: string;
  light: Light;
  flagged_for_review: boolean;
  criteria: OutcomeDoc[];
}

export interface GuidanceDoc {
  check_key: string;
  threat: string;
  remediation: string;
  self_defense: string;
}

export interface SiteDetailDoc {
  url: string;
  registrable_domain: string;
  attributes: Record<string, string>;
  list_id: string;
  scheme_id: string;
  scheme_version: number;
  scanned: boolean;
  record: RecordDoc | null;
  rating: RatingDoc | null;
  guidance: GuidanceDoc[];
}

export interface HistoryPointDoc {
  started_at: string;
  finished_at: string;
  score: number | null;
  grade: string;
  light: Light;
}

export interface HistoryDoc {
  url: string;
  list_id: string;
  scheme_id: string;
  scheme_version: number;
  points: HistoryPointDoc[];
}

export interface CatalogDoc {
  families: string[];
  checks: Record<string, { type: string; family: string }>;
  predicates: string[];
  tracker_categories: string[];
  guidance: Record<
    string,
    { threat: string; remediation: string; self_defense: string }
  >;
}

export interface ListSummary {
  id: string;
  name: string;
  description: string;
  site_count: number;
  columns: string[];
  version: number;
}

export interface ListIndexDoc {
  lists: ListSummary[];
  total: number;
  limit: number;
  offset: number;
}

export interface SchemeSummary {
  id: string;
  name: string;
  version: number;
  criteria_count: number;
}

export interface SingleScanDoc {
  url: string;
  record: RecordDoc;
  rating: RatingDoc;
}

export interface HealthDoc {
  status: string;
  version: string;
  dataset_digests: Record<string, string>;
}

export interface ScanOutcomeEntry {
  url: string;
  status: "completed" | "denied" | "error";
  retry_after_s: number | null;
  detail: string;
}

export interface ScanOutcomesDoc {
  list_id: string;
  admitted: number;
  denied: number;
  outcomes: ScanOutcomeEntry[];
}

export interface Violation {
  code: string;
  field: string;
  message: string;
  site_index?: number;
}
