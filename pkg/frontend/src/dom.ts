import { SessionController } from "./controller.js";
import { canSubmit } from "./state.js";
import type { SessionState } from "./state.js";
import type { Scale } from "./types.js";
import { SCALE_MAX, SCALE_MIN } from "./types.js";

const SCALES: ReadonlyArray<{ scale: Scale; label: string; hint: string }> = [
  { scale: "fluency", label: "Fluency", hint: "Is the translation fluent, well-formed English?" },
  { scale: "adequacy", label: "Adequacy", hint: "Does it preserve the meaning of the source?" },
];

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function textBlock(label: string, text: string, lang?: string): HTMLElement {
  const block = el("div", "text-block");
  block.appendChild(el("div", "text-label", label));
  const body = el("div", "text-body", text);
  if (lang) body.setAttribute("lang", lang);
  block.appendChild(body);
  return block;
}

function scaleRow(c: SessionController, state: SessionState, spec: (typeof SCALES)[number]): HTMLElement {
  const row = el("div", "scale" + (state.activeScale === spec.scale ? " active" : ""));
  row.dataset.scale = spec.scale;
  const head = el("div", "scale-head");
  head.appendChild(el("span", "scale-label", spec.label));
  head.appendChild(el("span", "scale-hint", spec.hint));
  row.appendChild(head);
  const buttons = el("div", "scale-buttons");
  const chosen = state[spec.scale];
  for (let value = SCALE_MIN; value <= SCALE_MAX; value++) {
    const btn = el("button", "scale-btn" + (chosen === value ? " selected" : ""), String(value));
    btn.dataset.scale = spec.scale;
    btn.dataset.value = String(value);
    btn.setAttribute("aria-pressed", chosen === value ? "true" : "false");
    btn.addEventListener("click", () => c.select(spec.scale, value));
    buttons.appendChild(btn);
  }
  row.addEventListener("click", (event) => {
    // buttons already move the active scale via select(); don't fight them
    if ((event.target as HTMLElement).tagName !== "BUTTON") c.setActiveScale(spec.scale);
  });
  row.appendChild(buttons);
  return row;
}

function signinView(c: SessionController, prefill: Prefill): HTMLElement {
  const box = el("div", "card signin");
  box.appendChild(el("h1", undefined, "Translation rating"));
  box.appendChild(el("p", "muted", "Enter the session id you were given and a rater id."));
  const session = el("input") as HTMLInputElement;
  session.id = "session-input";
  session.placeholder = "session id";
  session.value = prefill.session ?? "";
  const rater = el("input") as HTMLInputElement;
  rater.id = "rater-input";
  rater.placeholder = "rater id";
  rater.value = prefill.rater ?? "";
  const start = el("button", "primary", "Start");
  start.id = "start-btn";
  start.addEventListener("click", () => void c.start(session.value, rater.value));
  box.append(session, rater, start);
  return box;
}

function ratingView(c: SessionController, state: SessionState): HTMLElement {
  const item = state.item!;
  const box = el("div", "card rating");

  const progress = el("div", "progress");
  const position = Math.min(state.ratedCount + 1, state.total);
  const label = el("span", "progress-text", `Item ${position} of ${state.total}`);
  label.id = "progress-text";
  progress.appendChild(label);
  const bar = el("div", "progress-bar");
  const fill = el("div", "progress-fill");
  fill.style.width = state.total > 0 ? `${(state.ratedCount / state.total) * 100}%` : "0%";
  bar.appendChild(fill);
  progress.appendChild(bar);
  box.appendChild(progress);

  box.appendChild(textBlock("Source", item.source_text, "ne"));
  box.appendChild(textBlock("Reference translation", item.reference_text));
  box.appendChild(textBlock("System translation", item.hypothesis_text));

  for (const spec of SCALES) box.appendChild(scaleRow(c, state, spec));

  const submit = el("button", "primary", "Submit") as HTMLButtonElement;
  submit.id = "submit-btn";
  submit.disabled = !canSubmit(state);
  submit.addEventListener("click", () => void c.submit());
  box.appendChild(submit);
  box.appendChild(
    el("p", "muted hint", "Keys 1–5 rate the highlighted scale, Enter submits."),
  );
  return box;
}

function doneView(state: SessionState): HTMLElement {
  const box = el("div", "card done");
  box.appendChild(el("h1", undefined, "All done"));
  const summary = el("p", undefined, `You rated ${state.ratedCount} items. Thank you!`);
  summary.id = "done-text";
  box.appendChild(summary);
  return box;
}

function fatalView(c: SessionController, state: SessionState): HTMLElement {
  const box = el("div", "card fatal");
  box.appendChild(el("h1", undefined, "Something went wrong"));
  box.appendChild(el("p", "error-text", state.fatalError ?? "unknown error"));
  const retry = el("button", "primary", "Retry");
  retry.id = "retry-btn";
  retry.addEventListener("click", () => void c.refresh());
  box.appendChild(retry);
  return box;
}

function dialogView(c: SessionController, text: string): HTMLElement {
  const overlay = el("div", "overlay");
  overlay.id = "dialog";
  const box = el("div", "card dialog-box");
  box.appendChild(el("p", undefined, text));
  const ok = el("button", "primary", "OK");
  ok.id = "dialog-ok";
  ok.addEventListener("click", () => c.dismissDialog());
  box.appendChild(ok);
  overlay.appendChild(box);
  return overlay;
}

type Prefill = { session?: string; rater?: string };

export function render(root: HTMLElement, c: SessionController, prefill: Prefill = {}): void {
  const state = c.state;
  root.textContent = "";
  switch (state.phase) {
    case "signin":
      root.appendChild(signinView(c, prefill));
      break;
    case "loading":
      root.appendChild(el("div", "card", "Loading…"));
      break;
    case "rating":
      root.appendChild(ratingView(c, state));
      break;
    case "done":
      root.appendChild(doneView(state));
      break;
    case "fatal":
      root.appendChild(fatalView(c, state));
      break;
  }
  if (state.dialog !== null) root.appendChild(dialogView(c, state.dialog));
}

function onKeydown(event: KeyboardEvent, c: SessionController): void {
  const target = event.target as HTMLElement | null;
  if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
  const state = c.state;
  if (state.dialog !== null) {
    if (event.key === "Enter" || event.key === "Escape") c.dismissDialog();
    return;
  }
  if (state.phase !== "rating") return;
  if (event.key >= "1" && event.key <= "5") {
    c.select(state.activeScale, Number(event.key));
  } else if (event.key === "Enter") {
    void c.submit();
  }
}

/** Wire rendering + keyboard handling; returns a detach function. */
export function mount(root: HTMLElement, c: SessionController, prefill: Prefill = {}): () => void {
  c.onChange(() => render(root, c, prefill));
  const keyHandler = (event: KeyboardEvent) => onKeydown(event, c);
  document.addEventListener("keydown", keyHandler);
  render(root, c, prefill);
  return () => document.removeEventListener("keydown", keyHandler);
}
