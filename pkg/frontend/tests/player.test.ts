import { describe, expect, it } from "vitest";

import { PlaybackTracker, type AudioLike } from "../src/player.js";

class FakeAudio implements AudioLike {
  duration = 10;
  currentTime = 0;
  private listeners = new Map<string, Array<() => void>>();

  addEventListener(type: string, listener: () => void): void {
    const list = this.listeners.get(type) ?? [];
    list.push(listener);
    this.listeners.set(type, list);
  }

  fire(type: string): void {
    for (const listener of this.listeners.get(type) ?? []) listener();
  }

  playThrough(step = 0.25): void {
    this.fire("play");
    while (this.currentTime < this.duration) {
      this.currentTime = Math.min(this.currentTime + step, this.duration);
      this.fire("timeupdate");
    }
    this.fire("ended");
  }
}

describe("PlaybackTracker", () => {
  it("starts unplayed and marks playing on play", () => {
    const audio = new FakeAudio();
    const tracker = new PlaybackTracker(audio);
    expect(tracker.phase).toBe("unplayed");
    audio.fire("play");
    expect(tracker.phase).toBe("playing");
  });

  it("completes after natural full playback", () => {
    const audio = new FakeAudio();
    const tracker = new PlaybackTracker(audio);
    const phases: string[] = [];
    tracker.onChange((phase) => phases.push(phase));
    audio.playThrough();
    expect(tracker.phase).toBe("completed");
    expect(phases).toEqual(["playing", "completed"]);
  });

  it("ignores seek-to-end without playback", () => {
    const audio = new FakeAudio();
    const tracker = new PlaybackTracker(audio);
    audio.fire("play");
    // jump straight to the end: one giant timeupdate delta, then ended
    audio.currentTime = 10;
    audio.fire("timeupdate");
    audio.fire("ended");
    expect(tracker.phase).toBe("playing");
    expect(tracker.playedSeconds).toBe(0);
  });

  it("does not complete when less than 95% was actually played", () => {
    const audio = new FakeAudio();
    const tracker = new PlaybackTracker(audio);
    audio.fire("play");
    while (audio.currentTime < 8) {
      audio.currentTime += 0.25;
      audio.fire("timeupdate");
    }
    audio.currentTime = 10; // seek over the last fifth
    audio.fire("seeking");
    audio.fire("timeupdate");
    audio.fire("ended");
    expect(tracker.phase).toBe("playing");
  });

  it("completes when replaying covers the missed part", () => {
    const audio = new FakeAudio();
    const tracker = new PlaybackTracker(audio);
    audio.fire("play");
    while (audio.currentTime < 6) {
      audio.currentTime += 0.25;
      audio.fire("timeupdate");
    }
    audio.currentTime = 0; // rewind, then play everything
    audio.fire("seeking");
    audio.fire("timeupdate");
    audio.playThrough();
    expect(tracker.phase).toBe("completed");
  });
});
