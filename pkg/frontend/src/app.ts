/** DOM controller: owns mutable state, delegates everything renderable to the
 * pure view functions and everything remote to ApiClient.
 */

import { ApiClient, ApiFailure } from "./api.js";
import type { RiskEntry, WhatIfQuery, WhatIfReport } from "./types.js";
import { DEFAULT_WHATIF_QUERY } from "./types.js";
import {
  renderError,
  renderOfflineBanner,
  renderRiskTable,
  renderUserPicker,
  renderWhatIf,
} from "./view.js";

const HEALTH_POLL_MS = 5000;

interface AppState {
  userId: number;
  version: number;
  entries: RiskEntry[];
  report: WhatIfReport | null;
  query: WhatIfQuery;
  offline: boolean;
  error: string | null;
}

export class App {
  private readonly client: ApiClient;
  private readonly root: HTMLElement;
  private readonly userIds: number[];
  private readonly state: AppState;
  private pollHandle: number | null = null;

  constructor(root: HTMLElement, client: ApiClient, userIds: number[]) {
    this.root = root;
    this.client = client;
    this.userIds = userIds;
    const first = userIds[0];
    this.state = {
      userId: first ?? 1,
      version: 0,
      entries: [],
      report: null,
      query: { ...DEFAULT_WHATIF_QUERY },
      offline: false,
      error: null,
    };
  }

  async start(): Promise<void> {
    this.root.addEventListener("click", (event) => void this.onClick(event));
    this.root.addEventListener("change", (event) => void this.onChange(event));
    this.pollHandle = setInterval(() => void this.checkHealth(), HEALTH_POLL_MS) as unknown as number;
    await this.checkHealth();
    await this.refresh();
  }

  stop(): void {
    if (this.pollHandle !== null) {
      clearInterval(this.pollHandle);
      this.pollHandle = null;
    }
  }

  private async checkHealth(): Promise<void> {
    const wasOffline = this.state.offline;
    try {
      await this.client.health();
      this.state.offline = false;
    } catch {
      this.state.offline = true;
    }
    if (this.state.offline !== wasOffline) {
      this.render();
      if (!this.state.offline) {
        await this.refresh();
      }
    }
  }

  private async refresh(): Promise<void> {
    try {
      const [entries, report] = await Promise.all([
        this.client.risks(this.state.userId),
        this.client.whatif(this.state.userId, this.state.query),
      ]);
      this.state.entries = entries;
      this.state.report = report;
      this.state.version = report.version;
      this.state.error = null;
    } catch (error) {
      this.state.error = error instanceof ApiFailure ? error.message : "request failed";
    }
    this.render();
  }

  private async onClick(event: Event): Promise<void> {
    const target = event.target;
    if (!(target instanceof HTMLElement)) {
      return;
    }
    const action = target.dataset["action"];
    const interestId = Number(target.dataset["interestId"]);
    if (!action || Number.isNaN(interestId)) {
      return;
    }
    try {
      const summary =
        action === "remove"
          ? await this.client.removeWithRetry(this.state.userId, interestId, this.state.version)
          : await this.client.restoreWithRetry(this.state.userId, interestId, this.state.version);
      this.state.version = summary.version;
      this.state.error = null;
    } catch (error) {
      this.state.error = error instanceof ApiFailure ? error.message : "request failed";
      this.render();
      return;
    }
    await this.refresh();
  }

  private async onChange(event: Event): Promise<void> {
    const target = event.target;
    if (!(target instanceof HTMLSelectElement)) {
      return;
    }
    const control = target.dataset["control"];
    if (control === "user") {
      this.state.userId = Number(target.value);
      this.state.version = 0;
    } else if (control === "strategy") {
      this.state.query.strategy = target.value as WhatIfQuery["strategy"];
    } else if (control === "floor") {
      this.state.query.floor = Number(target.value) as WhatIfQuery["floor"];
    } else {
      return;
    }
    await this.refresh();
  }

  private render(): void {
    this.root.innerHTML =
      renderOfflineBanner(this.state.offline) +
      renderError(this.state.error) +
      `<section class="picker">${renderUserPicker(this.userIds, this.state.userId)}</section>` +
      `<section class="risks"><h2>Interest profile</h2>` +
      renderRiskTable(this.state.entries) +
      `</section>` +
      `<section class="analysis"><h2>Re-identification walk</h2>` +
      renderWhatIf(this.state.report, this.state.query) +
      `</section>`;
  }
}
