import type { FetchLike } from "../src/api.js";

export type FakeItem = {
  item_key: string;
  source_text: string;
  reference_text: string;
  hypothesis_text: string;
};

/** Devanagari sources so tests cover non-ASCII round-tripping. */
export const ITEMS: FakeItem[] = [
  {
    item_key: "a3f1c2e4b5d60718",
    source_text: "म घर जान्छु।",
    reference_text: "I home go .",
    hypothesis_text: "I home go",
  },
  {
    item_key: "0918273645abcdef",
    source_text: "तिमी खाना खान्छौ?",
    reference_text: "you food eat ?",
    hypothesis_text: "you food eat ?",
  },
  {
    item_key: "deadbeef00112233",
    source_text: "ऊ भोलि आउँछ।",
    reference_text: "he tomorrow comes .",
    hypothesis_text: "tomorrow he comes .",
  },
];

type Call = { url: string; method: string; body?: unknown };

/**
 * In-memory stand-in for the rating server, speaking the same JSON bodies
 * and status codes. One session, any number of raters.
 */
export class FakeServer {
  calls: Call[] = [];
  finalized = false;
  private ratings = new Map<string, { fluency: number; adequacy: number }>();

  constructor(
    readonly sessionId: string = "sess-1",
    readonly items: FakeItem[] = ITEMS,
  ) {}

  ratedBy(rater: string): number {
    let n = 0;
    for (const key of this.ratings.keys()) if (key.startsWith(`${rater}`)) n++;
    return n;
  }

  /** Pre-seed ratings, e.g. to simulate a rater resuming mid-session. */
  seed(rater: string, count: number): void {
    for (const item of this.items.slice(0, count)) {
      this.ratings.set(`${rater}${item.item_key}`, { fluency: 3, adequacy: 3 });
    }
  }

  fetch: FetchLike = (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.calls.push({ url, method, body });
    const parsed = new URL(url, "http://test");

    if (method === "GET" && parsed.pathname === `/sessions/${this.sessionId}/next`) {
      return reply(200, this.next(parsed.searchParams.get("rater") ?? ""));
    }
    if (method === "POST" && parsed.pathname === "/ratings") {
      return this.submit(body);
    }
    return reply(404, { detail: "no such route" });
  };

  private next(rater: string) {
    const rated = this.ratedBy(rater);
    for (const item of this.items) {
      if (!this.ratings.has(`${rater}${item.item_key}`)) {
        return { done: false, item: { ...item, position: rated, total: this.items.length } };
      }
    }
    return { done: true, rated, total: this.items.length };
  }

  private submit(body: {
    session_id: string;
    rater: string;
    item_key: string;
    fluency: number;
    adequacy: number;
  }): Promise<Response> {
    if (this.finalized) {
      return reply(409, { detail: "session is finalized" });
    }
    if (body.session_id !== this.sessionId) {
      return reply(404, { detail: "unknown session" });
    }
    for (const value of [body.fluency, body.adequacy]) {
      if (!Number.isInteger(value) || value < 1 || value > 5) {
        return reply(400, { detail: `rating ${value} outside 1..5` });
      }
    }
    if (!this.items.some((item) => item.item_key === body.item_key)) {
      return reply(404, { detail: "unknown item key" });
    }
    const key = `${body.rater}${body.item_key}`;
    const existing = this.ratings.get(key);
    if (existing && (existing.fluency !== body.fluency || existing.adequacy !== body.adequacy)) {
      return reply(409, { detail: "conflicting resubmission" });
    }
    this.ratings.set(key, { fluency: body.fluency, adequacy: body.adequacy });
    return reply(200, { ok: true, duplicate: Boolean(existing) });
  }
}

function reply(status: number, body: unknown): Promise<Response> {
  return Promise.resolve(
    new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    }),
  );
}
