/** Response shapes served under /api/v1, mirrored from the server schemas. */

export type RiskLevel = "red" | "orange" | "yellow" | "green";

export interface RiskEntry {
  interest_id: number;
  name: string;
  audience: number;
  level: RiskLevel;
  active: boolean;
}

export interface SessionSummary {
  user_id: number;
  version: number;
  removed: number[];
  entries: RiskEntry[];
}

export interface WhatIfReport {
  user_id: number;
  version: number;
  active_count: number;
  prefix_sizes: number[];
  unique_at: number | null;
  censored_sizes: number[];
}

export interface Health {
  status: string;
  population_digest: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

export interface WhatIfQuery {
  strategy: "lp" | "random";
  floor: 1 | 20 | 100 | 1000;
  seed: number;
}

export const DEFAULT_WHATIF_QUERY: WhatIfQuery = { strategy: "lp", floor: 20, seed: 0 };
