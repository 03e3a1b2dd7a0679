// Client-side task state machine for the two-phase workflow.
//
// Phases only move forward: listening -> phase1_open -> phase1_locked ->
// phase2_open -> submitted. The overall selection is immutable once
// locked, and the axis panel cannot be submitted from any earlier phase:
// the gating is structural (submitAxisPanel throws outside phase2_open),
// not just disabled buttons.

import { ApiClient, ApiError } from "./api.js";
import type { PlayerPhase } from "./player.js";
import { AXES, type Axis, type Choice, type TaskPayload } from "./types.js";

export type Phase =
  | "listening"
  | "phase1_open"
  | "phase1_locked"
  | "phase2_open"
  | "submitted";

const PHASE_ORDER: readonly Phase[] = [
  "listening",
  "phase1_open",
  "phase1_locked",
  "phase2_open",
  "submitted",
];

export interface TaskViewState {
  taskId: string;
  sentenceText: string;
  sentenceLanguage: string;
  audioUrls: { a: string; b: string };
  slotA: PlayerPhase;
  slotB: PlayerPhase;
  phase: Phase;
  overallSelection: Choice | null;
  axisSelections: Partial<Record<Axis, Choice>>;
  quotaCompleted: number;
  quotaTotal: number;
  recordId: string | null;
}

export function initialTaskState(task: TaskPayload): TaskViewState {
  return {
    taskId: task.task_id,
    sentenceText: task.sentence.text,
    sentenceLanguage: task.sentence.language,
    audioUrls: { a: task.slots.a.audio_url, b: task.slots.b.audio_url },
    slotA: "unplayed",
    slotB: "unplayed",
    phase: "listening",
    overallSelection: null,
    axisSelections: {},
    quotaCompleted: task.quota.completed,
    quotaTotal: task.quota.total,
    recordId: null,
  };
}

function advance(state: TaskViewState, next: Phase): TaskViewState {
  // monotone: a later phase never falls back to an earlier one
  if (PHASE_ORDER.indexOf(next) < PHASE_ORDER.indexOf(state.phase)) {
    return state;
  }
  return { ...state, phase: next };
}

export function updatePlayback(
  state: TaskViewState,
  slot: "a" | "b",
  phase: PlayerPhase,
): TaskViewState {
  const updated = {
    ...state,
    slotA: slot === "a" ? phase : state.slotA,
    slotB: slot === "b" ? phase : state.slotB,
  };
  if (
    updated.phase === "listening" &&
    updated.slotA === "completed" &&
    updated.slotB === "completed"
  ) {
    return advance(updated, "phase1_open");
  }
  return updated;
}

// Choice buttons enable only when both players report natural completion.
export function gatePhase1(state: TaskViewState): boolean {
  return state.phase === "phase1_open";
}

export async function lockAndReveal(
  state: TaskViewState,
  choice: Choice,
  api: ApiClient,
): Promise<TaskViewState> {
  if (state.phase !== "phase1_open") {
    throw new Error(`cannot lock from phase ${state.phase}`);
  }
  const proof = state.slotA === "completed" && state.slotB === "completed";
  try {
    await api.submitOverall(state.taskId, choice, proof);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      // already locked server-side: resynchronize from the authoritative
      // state carried in the conflict response
      const serverOverall = err.details["overall"] as Choice | undefined;
      const serverState = err.details["state"];
      const resynced = {
        ...state,
        overallSelection: serverOverall ?? state.overallSelection,
      };
      return advance(
        resynced,
        serverState === "complete" ? "submitted" : "phase2_open",
      );
    }
    throw err;
  }
  return advance({ ...state, overallSelection: choice }, "phase2_open");
}

export function selectAxis(
  state: TaskViewState,
  axis: Axis,
  choice: Choice,
): TaskViewState {
  if (state.phase !== "phase2_open") {
    throw new Error(`axis panel is not open in phase ${state.phase}`);
  }
  return {
    ...state,
    axisSelections: { ...state.axisSelections, [axis]: choice },
  };
}

export function missingAxes(state: TaskViewState): Axis[] {
  return AXES.filter((axis) => state.axisSelections[axis] === undefined);
}

export function axisPanelComplete(state: TaskViewState): boolean {
  return missingAxes(state).length === 0;
}

export async function submitAxisPanel(
  state: TaskViewState,
  api: ApiClient,
): Promise<TaskViewState> {
  if (state.phase !== "phase2_open") {
    throw new Error(`cannot submit axes from phase ${state.phase}`);
  }
  if (!axisPanelComplete(state)) {
    throw new Error(`axes incomplete: missing ${missingAxes(state).join(", ")}`);
  }
  const result = await api.submitAxes(
    state.taskId,
    state.axisSelections as Record<Axis, Choice>,
  );
  return advance(
    {
      ...state,
      recordId: result.record_id,
      quotaCompleted: result.quota.completed,
      quotaTotal: result.quota.total,
    },
    "submitted",
  );
}
