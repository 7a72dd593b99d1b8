import { describe, expect, it } from "vitest";

import { DEFAULT_WHATIF_QUERY } from "../src/types.js";
import type { RiskEntry, WhatIfReport } from "../src/types.js";
import {
  escapeHtml,
  renderError,
  renderOfflineBanner,
  renderRiskRow,
  renderRiskTable,
  renderUserPicker,
  renderWhatIf,
} from "../src/view.js";

const RED_ACTIVE: RiskEntry = {
  interest_id: 3,
  name: "small-batch fermentation",
  audience: 3,
  level: "red",
  active: true,
};

describe("risk rows", () => {
  it("shows an active red entry with a Remove button", () => {
    const html = renderRiskRow(RED_ACTIVE);
    expect(html).toContain('class="risk-row level-red active"');
    expect(html).toContain("background:#c5221f");
    expect(html).toContain(">Red<");
    expect(html).toContain('data-action="remove"');
    expect(html).toContain(">Remove<");
    expect(html).toContain('<td class="status">active</td>');
  });

  it("flips to removed with a Restore button once inactive", () => {
    const html = renderRiskRow({ ...RED_ACTIVE, active: false });
    expect(html).toContain('class="risk-row level-red removed"');
    expect(html).toContain('<td class="status">removed</td>');
    expect(html).toContain('data-action="restore"');
    expect(html).toContain(">Restore<");
    expect(html).not.toContain('data-action="remove"');
  });

  it("renders an audience of exactly one million as green", () => {
    const html = renderRiskRow({
      interest_id: 4,
      name: "board games",
      audience: 1_000_000,
      level: "green",
      active: true,
    });
    expect(html).toContain("level-green");
    expect(html).toContain("background:#188038");
    expect(html).toContain("1,000,000");
  });

  it("escapes interest names", () => {
    const html = renderRiskRow({ ...RED_ACTIVE, name: '<script>alert("x")</script>' });
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("risk table", () => {
  it("renders one row per entry under a header", () => {
    const entries: RiskEntry[] = [
      RED_ACTIVE,
      { interest_id: 9, name: "knitting", audience: 250_000, level: "yellow", active: true },
    ];
    const html = renderRiskTable(entries);
    expect(html.match(/<tr class="risk-row/g)).toHaveLength(2);
    expect(html).toContain("<th>Interest</th>");
    expect(html).toContain("250,000");
  });
});

describe("what-if panel", () => {
  const REPORT: WhatIfReport = {
    user_id: 3,
    version: 0,
    active_count: 3,
    prefix_sizes: [3, 2, 1],
    unique_at: 3,
    censored_sizes: [20, 20, 20],
  };

  it("shows the identifying prefix length and a sparkline", () => {
    const html = renderWhatIf(REPORT, DEFAULT_WHATIF_QUERY);
    expect(html).toContain("unique after 3 interests");
    expect(html).toContain('data-unique-at="3"');
    expect(html).toContain('class="unique-at exposed"');
    expect(html).toContain("<svg");
    expect(html).toContain("3 active interests");
  });

  it("marks a never-unique walk as safe", () => {
    const html = renderWhatIf({ ...REPORT, unique_at: null, prefix_sizes: [3, 2] }, DEFAULT_WHATIF_QUERY);
    expect(html).toContain("not unique within 2 interests");
    expect(html).toContain('class="unique-at safe"');
    expect(html).toContain('data-unique-at=""');
  });

  it("reflects the active query in the controls", () => {
    const html = renderWhatIf(REPORT, { strategy: "random", floor: 100, seed: 0 });
    expect(html).toContain('<option value="random" selected>');
    expect(html).toContain('<option value="100" selected>');
  });

  it("renders a placeholder before the first report arrives", () => {
    const html = renderWhatIf(null, DEFAULT_WHATIF_QUERY);
    expect(html).toContain("No analysis yet.");
  });
});

describe("banners", () => {
  it("announces a lost server connection", () => {
    const html = renderOfflineBanner(true);
    expect(html).toContain('role="alert"');
    expect(html).toContain("Server unreachable");
    expect(renderOfflineBanner(false)).toBe("");
  });

  it("escapes error text", () => {
    expect(renderError("boom & <bang>")).toContain("boom &amp; &lt;bang&gt;");
    expect(renderError(null)).toBe("");
  });
});

describe("user picker", () => {
  it("marks the selected user", () => {
    const html = renderUserPicker([1, 2, 3], 2);
    expect(html).toContain('<option value="2" selected>');
    expect(html).not.toContain('<option value="1" selected>');
  });
});

describe("escapeHtml", () => {
  it("covers the five dangerous characters", () => {
    expect(escapeHtml(`&<>"'`)).toBe("&amp;&lt;&gt;&quot;&#39;");
  });
});
