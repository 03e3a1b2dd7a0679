// DOM rendering for the task workflow. Open tasks only ever show the
// anonymous labels "Model A" and "Model B": system and voice identities
// never reach the client, and the audio comes through proxied slot URLs.

import { ApiClient } from "./api.js";
import { PlaybackTracker } from "./player.js";
import {
  TaskViewState,
  axisPanelComplete,
  gatePhase1,
  lockAndReveal,
  missingAxes,
  selectAxis,
  submitAxisPanel,
  updatePlayback,
} from "./taskState.js";
import {
  AXES,
  AXIS_HINTS,
  AXIS_LABELS,
  CHOICES,
  CHOICE_LABELS,
  type Choice,
} from "./types.js";

export interface TaskController {
  state: TaskViewState;
  container: HTMLElement;
  // test hook: feed playback phase changes without a real audio engine
  playbackChanged(slot: "a" | "b", phase: "unplayed" | "playing" | "completed"): void;
  choose(choice: Choice): Promise<void>;
  pickAxis(axis: (typeof AXES)[number], choice: Choice): void;
  submitAxes(): Promise<void>;
}

export interface TaskCallbacks {
  onSubmitted?: (state: TaskViewState) => void;
}

export function renderTask(
  container: HTMLElement,
  initial: TaskViewState,
  api: ApiClient,
  callbacks: TaskCallbacks = {},
): TaskController {
  const controller: TaskController = {
    state: initial,
    container,
    playbackChanged(slot, phase) {
      controller.state = updatePlayback(controller.state, slot, phase);
      draw();
    },
    async choose(choice) {
      if (!gatePhase1(controller.state)) return; // inert outside phase1_open
      controller.state = await lockAndReveal(controller.state, choice, api);
      draw();
    },
    pickAxis(axis, choice) {
      if (controller.state.phase !== "phase2_open") return;
      controller.state = selectAxis(controller.state, axis, choice);
      draw();
    },
    async submitAxes() {
      if (controller.state.phase !== "phase2_open") return;
      if (!axisPanelComplete(controller.state)) {
        draw(); // re-render highlights the missing axes
        return;
      }
      controller.state = await submitAxisPanel(controller.state, api);
      draw();
      callbacks.onSubmitted?.(controller.state);
    },
  };

  function draw(): void {
    const state = controller.state;
    container.replaceChildren();

    const sentence = el("p", "sentence", state.sentenceText);
    sentence.setAttribute("lang", state.sentenceLanguage);
    container.appendChild(sentence);

    container.appendChild(slotCard("a", "Model A", state));
    container.appendChild(slotCard("b", "Model B", state));

    container.appendChild(choiceRow(state));
    if (state.phase === "phase2_open" || state.phase === "submitted") {
      container.appendChild(axisPanel(state));
    }
    container.appendChild(progress(state));
  }

  function slotCard(slot: "a" | "b", label: string, state: TaskViewState) {
    const card = el("div", `slot slot-${slot}`);
    card.appendChild(el("h3", "slot-label", label));
    const audio = document.createElement("audio");
    audio.setAttribute("controls", "");
    audio.src = state.audioUrls[slot];
    audio.className = `player-${slot}`;
    const tracker = new PlaybackTracker(audio);
    tracker.onChange((phase) => controller.playbackChanged(slot, phase));
    card.appendChild(audio);
    const status = slot === "a" ? state.slotA : state.slotB;
    card.appendChild(el("span", `playback-status status-${status}`, status));
    return card;
  }

  function choiceRow(state: TaskViewState) {
    const row = el("div", "overall-row");
    row.appendChild(el("h3", "", "Which sounded better overall?"));
    if (state.phase === "listening" || state.phase === "phase1_open") {
      const enabled = gatePhase1(state);
      for (const choice of CHOICES) {
        const button = el("button", "overall-choice", CHOICE_LABELS[choice]);
        button.setAttribute("data-choice", choice);
        if (!enabled) button.setAttribute("disabled", "");
        button.addEventListener("click", () => void controller.choose(choice));
        row.appendChild(button);
      }
      if (!enabled) {
        row.appendChild(
          el("p", "hint", "Listen to both samples all the way through first."),
        );
      }
    } else {
      // locked: the choice renders as static text, structurally inert
      const locked = el(
        "p",
        "overall-locked",
        `Overall choice (locked): ${
          state.overallSelection ? CHOICE_LABELS[state.overallSelection] : "—"
        }`,
      );
      row.appendChild(locked);
    }
    return row;
  }

  function axisPanel(state: TaskViewState) {
    const missing = new Set(missingAxes(state));
    const panel = el("div", "axis-panel");
    panel.appendChild(el("h3", "", "Now rate each aspect"));
    for (const axis of AXES) {
      const rowClass =
        missing.has(axis) && state.phase === "phase2_open"
          ? "axis-row missing"
          : "axis-row";
      const row = el("div", rowClass);
      row.setAttribute("data-axis", axis);
      const label = el("span", "axis-label", AXIS_LABELS[axis]);
      label.setAttribute("title", AXIS_HINTS[axis]);
      row.appendChild(label);
      for (const choice of CHOICES) {
        const button = el("button", "axis-choice", CHOICE_LABELS[choice]);
        button.setAttribute("data-axis", axis);
        button.setAttribute("data-choice", choice);
        if (state.axisSelections[axis] === choice) {
          button.classList.add("selected");
        }
        if (state.phase !== "phase2_open") button.setAttribute("disabled", "");
        button.addEventListener("click", () => controller.pickAxis(axis, choice));
        row.appendChild(button);
      }
      panel.appendChild(row);
    }
    if (state.phase === "phase2_open") {
      const submit = el("button", "axis-submit", "Submit ratings");
      if (!axisPanelComplete(state)) submit.setAttribute("disabled", "");
      submit.addEventListener("click", () => void controller.submitAxes());
      panel.appendChild(submit);
    } else {
      panel.appendChild(el("p", "axis-done", "Ratings submitted."));
    }
    return panel;
  }

  function progress(state: TaskViewState) {
    return el(
      "div",
      "progress",
      `${state.quotaCompleted} of ${state.quotaTotal} comparisons completed`,
    );
  }

  draw();
  return controller;
}

export function renderQuotaComplete(container: HTMLElement, total: number): void {
  container.replaceChildren(
    el("div", "complete-screen", `All ${total} comparisons done. Thank you!`),
  );
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}
