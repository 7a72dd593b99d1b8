/** HTTP client for the /api/v1 surface with optimistic-versioning retry.
 *
 * Every write carries the session version the caller last saw.  A 409 means
 * another tab won the race; the retrying wrappers refetch the current version
 * once and resend, then give up so conflicts stay visible instead of looping.
 */

import type {
  ApiErrorBody,
  Health,
  RiskEntry,
  SessionSummary,
  WhatIfQuery,
  WhatIfReport,
} from "./types.js";
import { DEFAULT_WHATIF_QUERY } from "./types.js";

export class ApiFailure extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiFailure";
    this.status = status;
    this.code = code;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function decode<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let body: ApiErrorBody;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    body = { code: "unknown_error", message: `HTTP ${response.status}` };
  }
  throw new ApiFailure(response.status, body.code, body.message);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn: FetchLike = (input, init) => fetch(input, init)) {
    this.base = baseUrl.replace(/\/$/, "") + "/api/v1";
    this.fetchFn = fetchFn;
  }

  async health(): Promise<Health> {
    return decode<Health>(await this.fetchFn(`${this.base}/health`));
  }

  async risks(userId: number): Promise<RiskEntry[]> {
    return decode<RiskEntry[]>(await this.fetchFn(`${this.base}/users/${userId}/risks`));
  }

  async whatif(userId: number, query: WhatIfQuery = DEFAULT_WHATIF_QUERY): Promise<WhatIfReport> {
    const params = new URLSearchParams({
      strategy: query.strategy,
      floor: String(query.floor),
      seed: String(query.seed),
    });
    return decode<WhatIfReport>(
      await this.fetchFn(`${this.base}/users/${userId}/whatif?${params.toString()}`),
    );
  }

  async remove(userId: number, interestId: number, version: number): Promise<SessionSummary> {
    return this.mutate(userId, "remove", interestId, version);
  }

  async restore(userId: number, interestId: number, version: number): Promise<SessionSummary> {
    return this.mutate(userId, "restore", interestId, version);
  }

  /** Remove with a single automatic retry after a stale-version conflict. */
  async removeWithRetry(
    userId: number,
    interestId: number,
    version: number,
  ): Promise<SessionSummary> {
    return this.retryOnce(userId, (v) => this.remove(userId, interestId, v), version);
  }

  /** Restore with a single automatic retry after a stale-version conflict. */
  async restoreWithRetry(
    userId: number,
    interestId: number,
    version: number,
  ): Promise<SessionSummary> {
    return this.retryOnce(userId, (v) => this.restore(userId, interestId, v), version);
  }

  private async mutate(
    userId: number,
    action: "remove" | "restore",
    interestId: number,
    version: number,
  ): Promise<SessionSummary> {
    const response = await this.fetchFn(
      `${this.base}/users/${userId}/interests/${interestId}/${action}`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ version }),
      },
    );
    return decode<SessionSummary>(response);
  }

  private async retryOnce(
    userId: number,
    send: (version: number) => Promise<SessionSummary>,
    version: number,
  ): Promise<SessionSummary> {
    try {
      return await send(version);
    } catch (error) {
      if (!(error instanceof ApiFailure) || error.status !== 409) {
        throw error;
      }
      const fresh = await this.whatif(userId);
      return send(fresh.version);
    }
  }
}
