import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  axisPanelComplete,
  gatePhase1,
  initialTaskState,
  lockAndReveal,
  missingAxes,
  selectAxis,
  submitAxisPanel,
  updatePlayback,
} from "../src/taskState.js";
import { AXES, type Choice } from "../src/types.js";
import { FakeServer } from "./fakeServer.js";

function setup() {
  const server = new FakeServer();
  const api = new ApiClient("", server.fetch);
  const state = initialTaskState(server.taskPayload());
  return { server, api, state };
}

function bothPlayed(state: ReturnType<typeof initialTaskState>) {
  return updatePlayback(updatePlayback(state, "a", "completed"), "b", "completed");
}

describe("task state machine", () => {
  it("opens phase 1 only when both slots completed", () => {
    const { state } = setup();
    expect(state.phase).toBe("listening");
    expect(gatePhase1(state)).toBe(false);
    const oneDone = updatePlayback(state, "a", "completed");
    expect(gatePhase1(oneDone)).toBe(false);
    const ready = updatePlayback(oneDone, "b", "completed");
    expect(ready.phase).toBe("phase1_open");
    expect(gatePhase1(ready)).toBe(true);
  });

  it("locks the overall choice and reveals the axis panel", async () => {
    const { server, api, state } = setup();
    const locked = await lockAndReveal(bothPlayed(state), "BothGood", api);
    expect(locked.phase).toBe("phase2_open");
    expect(locked.overallSelection).toBe("BothGood");
    expect(server.task.state).toBe("phase1_locked");
    expect(server.lockCount).toBe(1);
  });

  it("refuses to lock before both slots completed", async () => {
    const { api, state } = setup();
    await expect(lockAndReveal(state, "A", api)).rejects.toThrow(/cannot lock/);
  });

  it("phases never move backward", () => {
    const { state } = setup();
    const ready = bothPlayed(state);
    // a playback event arriving late must not reopen the listening phase
    const after = updatePlayback(ready, "a", "playing");
    expect(after.phase).toBe("phase1_open");
  });

  it("resynchronizes from a 409 conflict using the server state", async () => {
    const { server, api, state } = setup();
    server.task.state = "phase1_locked";
    server.task.overall = "B";
    const resynced = await lockAndReveal(bothPlayed(state), "A", api);
    expect(resynced.phase).toBe("phase2_open");
    expect(resynced.overallSelection).toBe("B"); // the server's locked choice
    expect(server.lockCount).toBe(0); // no double lock
  });

  it("network retry causes a single lock, no duplicate", async () => {
    const { server, api, state } = setup();
    server.dropResponses = 1; // server locks, but the response times out
    const locked = await lockAndReveal(bothPlayed(state), "A", api);
    expect(locked.phase).toBe("phase2_open");
    expect(server.lockCount).toBe(1);
  });

  it("structurally rejects axis submission before the lock", async () => {
    const { api, state } = setup();
    const ready = bothPlayed(state);
    await expect(submitAxisPanel(ready, api)).rejects.toThrow(/cannot submit/);
    expect(() => selectAxis(ready, "noise", "A")).toThrow(/not open/);
  });

  it("requires all six axes before submitting", async () => {
    const { server, api, state } = setup();
    let current = await lockAndReveal(bothPlayed(state), "A", api);
    for (const axis of AXES.slice(0, 5)) {
      current = selectAxis(current, axis, "A");
    }
    expect(axisPanelComplete(current)).toBe(false);
    expect(missingAxes(current)).toEqual(["noise"]);
    await expect(submitAxisPanel(current, api)).rejects.toThrow(/incomplete/);
    expect(server.recordCount).toBe(0);

    current = selectAxis(current, "noise", "BothBad");
    const submitted = await submitAxisPanel(current, api);
    expect(submitted.phase).toBe("submitted");
    expect(submitted.recordId).toBe("c1");
    expect(submitted.quotaCompleted).toBe(1);
    expect(server.recordCount).toBe(1);
  });

  it("axis retry after a network failure emits a single record", async () => {
    const { server, api, state } = setup();
    let current = await lockAndReveal(bothPlayed(state), "A", api);
    for (const axis of AXES) {
      current = selectAxis(current, axis, "BothGood" as Choice);
    }
    server.dropResponses = 1; // record written, response lost
    const submitted = await submitAxisPanel(current, api);
    expect(submitted.phase).toBe("submitted");
    expect(server.recordCount).toBe(1);
    expect(submitted.quotaCompleted).toBe(1);
  });
});
