// Wire types for the rating server. Field names mirror the JSON bodies
// exactly; no run or scenario identity ever appears here.

export type PresentationItem = {
  item_key: string;
  source_text: string;
  reference_text: string;
  hypothesis_text: string;
  /** how many items this rater has already rated (0-based position) */
  position: number;
  total: number;
};

export type NextResponse =
  | { done: false; item: PresentationItem }
  | { done: true; rated: number; total: number };

export type RatingAck = {
  ok: boolean;
  duplicate: boolean;
};

export type Scale = "fluency" | "adequacy";

export const SCALE_MIN = 1;
export const SCALE_MAX = 5;
