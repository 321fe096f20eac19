import type { HistoryMessage, ListingSummary, ScoreResponse } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the scoring service endpoints. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async listListings(): Promise<ListingSummary[]> {
    const res = await this.fetchImpl(`${this.baseUrl}/v1/listings`);
    if (!res.ok) throw new Error(`listings failed: ${res.status}`);
    return res.json();
  }

  async getListing(id: string): Promise<ListingSummary> {
    const res = await this.fetchImpl(
      `${this.baseUrl}/v1/listings/${encodeURIComponent(id)}`,
    );
    if (res.status === 404) throw new Error("not-found");
    if (!res.ok) throw new Error(`listing failed: ${res.status}`);
    return res.json();
  }

  async score(
    question: string,
    candidates: string[],
    history: HistoryMessage[] | null,
  ): Promise<ScoreResponse> {
    const body: Record<string, unknown> = { question, candidates };
    if (history && history.length > 0) body.history = history;
    const res = await this.fetchImpl(`${this.baseUrl}/v1/score`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      const detail = await res.json().catch(() => ({ error: `${res.status}` }));
      throw new Error(`score failed (${res.status}): ${detail.error ?? ""}`);
    }
    return res.json();
  }
}
