// Browser entry point: session login, then the task loop. All state is
// recoverable from the server; reloading mid-task simply fetches the next
// assignment.

import { ApiClient, ApiError } from "./api.js";
import { initialTaskState } from "./taskState.js";
import { isQuotaExhausted } from "./types.js";
import { renderQuotaComplete, renderTask } from "./ui.js";

export function bootstrap(root: HTMLElement, api = new ApiClient("")): void {
  const form = document.createElement("form");
  form.className = "session-form";
  form.innerHTML = `
    <label>Rater id <input name="rater" required /></label>
    <button type="submit">Start</button>
    <p class="session-error" hidden></p>
  `;
  root.replaceChildren(form);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const raterId = (form.elements.namedItem("rater") as HTMLInputElement).value;
    void startSession(raterId);
  });

  async function startSession(raterId: string): Promise<void> {
    const errorBox = form.querySelector(".session-error") as HTMLElement;
    try {
      await api.openSession(raterId);
    } catch (err) {
      errorBox.hidden = false;
      errorBox.textContent =
        err instanceof ApiError ? err.message : "could not reach the server";
      return;
    }
    await taskLoop();
  }

  async function taskLoop(): Promise<void> {
    const payload = await api.nextTask();
    if (isQuotaExhausted(payload)) {
      renderQuotaComplete(root, 0);
      return;
    }
    const container = document.createElement("div");
    container.className = "task";
    root.replaceChildren(container);
    renderTask(container, initialTaskState(payload), api, {
      onSubmitted: () => void taskLoop(),
    });
  }
}

const rootElement = typeof document !== "undefined" && document.getElementById("app");
if (rootElement) {
  bootstrap(rootElement);
}
