/**
 * Entry point: wires the controller to the DOM, keyboard shortcuts
 * (p / ArrowUp = +1, n / ArrowDown = −1) and the 500 ms /state poll that
 * runs while a query is pending.
 */

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { render } from "./render.js";
import { labelFromKey } from "./view.js";

const POLL_MS = 500;

export function bootstrap(root: Document, apiBase = ""): SessionController {
  const controller = new SessionController(new ApiClient(apiBase), (view) =>
    render(root, view),
  );

  const form = root.getElementById("create-form") as HTMLFormElement;
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    void controller.start({
      class: String(data.get("class") ?? ""),
      strategy: String(data.get("strategy") ?? "mcle"),
      prior: String(data.get("prior") ?? "constant"),
    });
  });

  (root.getElementById("label-pos") as HTMLButtonElement).addEventListener(
    "click",
    () => void controller.submitLabel(1),
  );
  (root.getElementById("label-neg") as HTMLButtonElement).addEventListener(
    "click",
    () => void controller.submitLabel(-1),
  );

  root.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLSelectElement) {
      return;
    }
    const label = labelFromKey(ev.key);
    if (label !== null && controller.view.sessionId !== null) {
      ev.preventDefault();
      void controller.submitLabel(label);
    }
  });

  setInterval(() => {
    if (controller.view.sessionId !== null && !controller.view.finished) {
      void controller.refreshState();
    }
  }, POLL_MS);

  return controller;
}

if (typeof document !== "undefined" && document.getElementById("create-form")) {
  bootstrap(document);
}
