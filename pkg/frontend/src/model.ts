/** Presentation helpers.  Risk levels arrive classified by the server; the
 * client maps the level string to a colour and never rederives it from the
 * audience number.
 */

import type { RiskLevel, WhatIfReport } from "./types.js";

export const LEVEL_COLORS: Record<RiskLevel, string> = {
  red: "#c5221f",
  orange: "#e8710a",
  yellow: "#f9ab00",
  green: "#188038",
};

export const LEVEL_LABELS: Record<RiskLevel, string> = {
  red: "Red",
  orange: "Orange",
  yellow: "Yellow",
  green: "Green",
};

export function colorFor(level: RiskLevel): string {
  return LEVEL_COLORS[level];
}

export function formatAudience(audience: number): string {
  return audience.toLocaleString("en-US");
}

/** Human form of unique_at; null means the walk never narrowed to one user. */
export function describeUniqueAt(report: Pick<WhatIfReport, "unique_at" | "prefix_sizes">): string {
  if (report.unique_at === null) {
    return `not unique within ${report.prefix_sizes.length} interests`;
  }
  return `unique after ${report.unique_at} interest${report.unique_at === 1 ? "" : "s"}`;
}

/** Order key for "how exposed is this user": smaller unique_at = more exposed.
 * null sorts as infinitely safe so comparisons across removals stay monotone.
 */
export function uniqueAtRank(uniqueAt: number | null): number {
  return uniqueAt === null ? Number.POSITIVE_INFINITY : uniqueAt;
}
