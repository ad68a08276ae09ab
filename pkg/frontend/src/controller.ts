import { ApiError, RatingApi } from "./api.js";
import {
  applyNext,
  beginSession,
  canSubmit,
  dismissDialog,
  fail,
  initialState,
  select,
  setActiveScale,
  showDialog,
} from "./state.js";
import type { SessionState } from "./state.js";
import type { Scale } from "./types.js";

type Listener = (state: SessionState) => void;

/**
 * Orchestrates the rating loop: every transition awaits the server's answer,
 * and the view just re-renders from `state` on each change.
 */
export class SessionController {
  state: SessionState = initialState();
  private listeners: Listener[] = [];
  private busy = false;

  constructor(private readonly api: RatingApi) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private set(next: SessionState): void {
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }

  async start(sessionId: string, rater: string): Promise<void> {
    if (!sessionId.trim() || !rater.trim()) return;
    this.set(beginSession(this.state, sessionId.trim(), rater.trim()));
    await this.refresh();
  }

  /** Ask the server for the next unrated item; also how a reload resumes. */
  async refresh(): Promise<void> {
    try {
      const resp = await this.api.nextItem(this.state.sessionId, this.state.rater);
      this.set(applyNext(this.state, resp));
    } catch (err) {
      this.handleError(err);
    }
  }

  select(scale: Scale, value: number): void {
    this.set(select(this.state, scale, value));
  }

  setActiveScale(scale: Scale): void {
    this.set(setActiveScale(this.state, scale));
  }

  async submit(): Promise<void> {
    const { state } = this;
    if (!canSubmit(state) || this.busy) return;
    this.busy = true;
    try {
      await this.api.submitRating(
        state.sessionId,
        state.rater,
        state.item!.item_key,
        state.fluency!,
        state.adequacy!,
      );
    } catch (err) {
      this.handleError(err);
      return;
    } finally {
      this.busy = false;
    }
    await this.refresh();
  }

  dismissDialog(): void {
    this.set(dismissDialog(this.state));
  }

  private handleError(err: unknown): void {
    if (err instanceof ApiError && err.status >= 400 && err.status < 500) {
      // server said no (value out of range, session finalized, …): block
      // until the rater acknowledges, then let them carry on
      this.set(showDialog(this.state, err.detail));
      return;
    }
    const message = err instanceof Error ? err.message : String(err);
    this.set(fail(this.state, message));
  }
}
