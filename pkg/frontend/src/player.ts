// Playback completion tracking. A slot counts as completed only when the
// player fires its natural "ended" event AND the cumulative played time
// reached 95% of the duration, so seeking to the end does not unlock
// phase 1.

export type PlayerPhase = "unplayed" | "playing" | "completed";

// The subset of HTMLAudioElement the tracker needs; tests can use fakes.
export interface AudioLike {
  duration: number;
  currentTime: number;
  addEventListener(type: string, listener: () => void): void;
}

export interface TrackerOptions {
  completionRatio?: number;
  // currentTime jumps larger than this are treated as seeks, not playback
  seekJumpSeconds?: number;
}

export class PlaybackTracker {
  phase: PlayerPhase = "unplayed";
  playedSeconds = 0;

  private lastTime = 0;
  private readonly completionRatio: number;
  private readonly seekJumpSeconds: number;
  private listeners: Array<(phase: PlayerPhase) => void> = [];

  constructor(
    private readonly el: AudioLike,
    options: TrackerOptions = {},
  ) {
    this.completionRatio = options.completionRatio ?? 0.95;
    this.seekJumpSeconds = options.seekJumpSeconds ?? 1.5;
    el.addEventListener("play", () => this.onPlay());
    el.addEventListener("timeupdate", () => this.onTimeUpdate());
    el.addEventListener("seeking", () => this.onSeek());
    el.addEventListener("ended", () => this.onEnded());
  }

  onChange(listener: (phase: PlayerPhase) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.phase);
  }

  private onPlay(): void {
    this.lastTime = this.el.currentTime;
    if (this.phase === "unplayed") {
      this.phase = "playing";
      this.emit();
    }
  }

  private onTimeUpdate(): void {
    const now = this.el.currentTime;
    const delta = now - this.lastTime;
    if (delta > 0 && delta <= this.seekJumpSeconds) {
      this.playedSeconds += delta;
    }
    this.lastTime = now;
  }

  private onSeek(): void {
    this.lastTime = this.el.currentTime;
  }

  private onEnded(): void {
    if (this.phase === "completed") return;
    const required = this.completionRatio * this.el.duration;
    if (this.playedSeconds >= required) {
      this.phase = "completed";
      this.emit();
    }
  }
}
