import { SCALE_MAX, SCALE_MIN } from "./types.js";
import type { NextResponse, PresentationItem, Scale } from "./types.js";

export type Phase = "signin" | "loading" | "rating" | "done" | "fatal";

/**
 * Everything the UI knows, as one plain serializable object. The server is
 * the source of truth for progress, so nothing here survives a refresh —
 * reloading just asks for the next item again.
 */
export type SessionState = {
  phase: Phase;
  sessionId: string;
  rater: string;
  item: PresentationItem | null;
  fluency: number | null;
  adequacy: number | null;
  /** which scale the number keys 1–5 currently drive */
  activeScale: Scale;
  ratedCount: number;
  total: number;
  /** blocking dialog text from a server rejection, or null */
  dialog: string | null;
  fatalError: string | null;
};

export function initialState(): SessionState {
  return {
    phase: "signin",
    sessionId: "",
    rater: "",
    item: null,
    fluency: null,
    adequacy: null,
    activeScale: "fluency",
    ratedCount: 0,
    total: 0,
    dialog: null,
    fatalError: null,
  };
}

export function beginSession(state: SessionState, sessionId: string, rater: string): SessionState {
  return { ...initialState(), phase: "loading", sessionId, rater };
}

export function applyNext(state: SessionState, resp: NextResponse): SessionState {
  if (resp.done) {
    return {
      ...state,
      phase: "done",
      item: null,
      fluency: null,
      adequacy: null,
      ratedCount: resp.rated,
      total: resp.total,
    };
  }
  return {
    ...state,
    phase: "rating",
    item: resp.item,
    fluency: null,
    adequacy: null,
    activeScale: "fluency",
    ratedCount: resp.item.position,
    total: resp.item.total,
  };
}

export function select(state: SessionState, scale: Scale, value: number): SessionState {
  if (state.phase !== "rating" || state.dialog !== null) return state;
  if (!Number.isInteger(value) || value < SCALE_MIN || value > SCALE_MAX) return state;
  const next = { ...state, [scale]: value };
  // picking fluency hands the number keys to adequacy, so "4, 3, Enter" works
  if (scale === "fluency" && next.adequacy === null) next.activeScale = "adequacy";
  return next;
}

export function setActiveScale(state: SessionState, scale: Scale): SessionState {
  return { ...state, activeScale: scale };
}

/** Both scales chosen, no dialog in the way. */
export function canSubmit(state: SessionState): boolean {
  return (
    state.phase === "rating" &&
    state.item !== null &&
    state.fluency !== null &&
    state.adequacy !== null &&
    state.dialog === null
  );
}

export function showDialog(state: SessionState, text: string): SessionState {
  return { ...state, dialog: text };
}

export function dismissDialog(state: SessionState): SessionState {
  return { ...state, dialog: null };
}

export function fail(state: SessionState, message: string): SessionState {
  return { ...state, phase: "fatal", fatalError: message };
}
