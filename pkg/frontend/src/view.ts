/** Pure HTML renderers.  Every function maps state to a string so the view
 * layer can be exercised in plain node tests; app.ts owns all DOM access.
 */

import { colorFor, describeUniqueAt, formatAudience, LEVEL_LABELS } from "./model.js";
import { sparklineSvg } from "./sparkline.js";
import type { RiskEntry, WhatIfQuery, WhatIfReport } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderRiskRow(entry: RiskEntry): string {
  const status = entry.active ? "active" : "removed";
  const action = entry.active ? "remove" : "restore";
  const actionLabel = entry.active ? "Remove" : "Restore";
  return (
    `<tr class="risk-row level-${entry.level} ${status}" data-interest-id="${entry.interest_id}">` +
    `<td class="name">${escapeHtml(entry.name)}</td>` +
    `<td class="audience">${formatAudience(entry.audience)}</td>` +
    `<td class="level"><span class="badge" style="background:${colorFor(entry.level)}">` +
    `${LEVEL_LABELS[entry.level]}</span></td>` +
    `<td class="status">${status}</td>` +
    `<td class="action"><button type="button" data-action="${action}" ` +
    `data-interest-id="${entry.interest_id}">${actionLabel}</button></td>` +
    `</tr>`
  );
}

export function renderRiskTable(entries: readonly RiskEntry[]): string {
  const rows = entries.map(renderRiskRow).join("");
  return (
    `<table class="risk-table">` +
    `<thead><tr><th>Interest</th><th>Audience</th><th>Level</th>` +
    `<th>Status</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderWhatIf(report: WhatIfReport | null, query: WhatIfQuery): string {
  const selectors = renderQueryControls(query);
  if (report === null) {
    return `<div class="whatif">${selectors}<p class="whatif-empty">No analysis yet.</p></div>`;
  }
  const summary = describeUniqueAt(report);
  const uniqueClass = report.unique_at === null ? "safe" : "exposed";
  return (
    `<div class="whatif">` +
    selectors +
    `<p class="unique-at ${uniqueClass}" data-unique-at="${report.unique_at ?? ""}">` +
    `${escapeHtml(summary)}</p>` +
    `<p class="active-count">${report.active_count} active interests</p>` +
    sparklineSvg(report.prefix_sizes, report.unique_at) +
    `<p class="prefix-sizes">audience by prefix: ${report.prefix_sizes
      .map(formatAudience)
      .join(" &rarr; ")}</p>` +
    `</div>`
  );
}

function renderQueryControls(query: WhatIfQuery): string {
  const strategies: Array<WhatIfQuery["strategy"]> = ["lp", "random"];
  const floors: Array<WhatIfQuery["floor"]> = [1, 20, 100, 1000];
  const strategyOptions = strategies
    .map(
      (s) =>
        `<option value="${s}"${s === query.strategy ? " selected" : ""}>` +
        `${s === "lp" ? "least popular first" : "random order"}</option>`,
    )
    .join("");
  const floorOptions = floors
    .map((f) => `<option value="${f}"${f === query.floor ? " selected" : ""}>${f}</option>`)
    .join("");
  return (
    `<div class="whatif-controls">` +
    `<label>order <select data-control="strategy">${strategyOptions}</select></label>` +
    `<label>reporting floor <select data-control="floor">${floorOptions}</select></label>` +
    `</div>`
  );
}

export function renderOfflineBanner(offline: boolean): string {
  if (!offline) {
    return "";
  }
  return `<div class="banner offline" role="alert">Server unreachable. Retrying…</div>`;
}

export function renderError(message: string | null): string {
  if (message === null) {
    return "";
  }
  return `<div class="banner error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderUserPicker(userIds: readonly number[], selected: number): string {
  const options = userIds
    .map((id) => `<option value="${id}"${id === selected ? " selected" : ""}>user ${id}</option>`)
    .join("");
  return `<label>inspect <select data-control="user">${options}</select></label>`;
}
