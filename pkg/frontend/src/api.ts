import type { NextResponse, RatingAck } from "./types.js";

/** Server rejected the request; `status` and `detail` come from the response. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function request<T>(fetchImpl: FetchLike, url: string, init?: RequestInit): Promise<T> {
  const res = await fetchImpl(url, init);
  let body: unknown = null;
  try {
    body = await res.json();
  } catch {
    // non-JSON body; detail falls back to the status text below
  }
  if (!res.ok) {
    const detail =
      body && typeof body === "object" && typeof (body as { detail?: unknown }).detail === "string"
        ? (body as { detail: string }).detail
        : res.statusText || `HTTP ${res.status}`;
    throw new ApiError(res.status, detail);
  }
  return body as T;
}

export class RatingApi {
  constructor(
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private readonly base: string = "",
  ) {}

  nextItem(sessionId: string, rater: string): Promise<NextResponse> {
    const query = new URLSearchParams({ rater });
    const sid = encodeURIComponent(sessionId);
    return request(this.fetchImpl, `${this.base}/sessions/${sid}/next?${query}`);
  }

  submitRating(
    sessionId: string,
    rater: string,
    itemKey: string,
    fluency: number,
    adequacy: number,
  ): Promise<RatingAck> {
    return request(this.fetchImpl, `${this.base}/ratings`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        session_id: sessionId,
        rater,
        item_key: itemKey,
        fluency,
        adequacy,
      }),
    });
  }
}
