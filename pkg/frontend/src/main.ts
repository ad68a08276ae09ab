import { RatingApi } from "./api.js";
import { SessionController } from "./controller.js";
import { mount } from "./dom.js";

// ?session=...&rater=... prefills the signin form; with both present the
// session starts immediately (handy for links handed to raters).
const params = new URLSearchParams(window.location.search);
const session = params.get("session") ?? undefined;
const rater = params.get("rater") ?? undefined;

const controller = new SessionController(new RatingApi());
const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

mount(root, controller, { session, rater });
if (session && rater) void controller.start(session, rater);
