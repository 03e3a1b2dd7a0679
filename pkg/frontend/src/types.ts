// Wire types mirroring the annotation service's JSON API.

export type Choice = "A" | "B" | "BothGood" | "BothBad";

export const CHOICES: readonly Choice[] = ["A", "B", "BothGood", "BothBad"];

export const CHOICE_LABELS: Record<Choice, string> = {
  A: "Model A",
  B: "Model B",
  BothGood: "Both Good",
  BothBad: "Both Bad",
};

export const AXES = [
  "intelligibility",
  "expressiveness",
  "voice_quality",
  "liveliness",
  "hallucinations",
  "noise",
] as const;

export type Axis = (typeof AXES)[number];

export const AXIS_LABELS: Record<Axis, string> = {
  intelligibility: "Intelligibility",
  expressiveness: "Expressiveness",
  voice_quality: "Voice Quality",
  liveliness: "Liveliness",
  hallucinations: "Hallucinations",
  noise: "Presence of Noise",
};

// Shown as tooltips on the axis panel so raters apply consistent criteria.
export const AXIS_HINTS: Record<Axis, string> = {
  intelligibility:
    "How clearly and correctly the words are pronounced, including mixed-language words.",
  expressiveness:
    "Whether the rhythm, intonation and emotional tone fit the sentence.",
  voice_quality:
    "How natural and human the voice itself sounds, free of synthetic artifacts.",
  liveliness:
    "Energy and pacing: engaging delivery rather than flat or monotonous.",
  hallucinations:
    "Whether the audio sticks to the text: no skipped words, no invented sounds.",
  noise:
    "Background problems such as hiss, clicks, static or other distortions.",
};

export interface SlotPayload {
  audio_url: string;
}

export interface QuotaPayload {
  completed: number;
  total: number;
}

export interface TaskPayload {
  task_id: string;
  state: string;
  sentence: { id: string; text: string; language: string };
  slots: { a: SlotPayload; b: SlotPayload };
  overall: string | null;
  quota: QuotaPayload;
}

export interface QuotaExhaustedPayload {
  status: "quota_exhausted";
}

export type NextTaskPayload = TaskPayload | QuotaExhaustedPayload;

export function isQuotaExhausted(
  payload: NextTaskPayload,
): payload is QuotaExhaustedPayload {
  return (payload as QuotaExhaustedPayload).status === "quota_exhausted";
}

export interface SessionPayload {
  token: string;
  rater_id: string;
  expires_at: string;
}

export interface SubmitAxesPayload {
  status: "complete";
  record_id: string;
  quota: QuotaPayload;
}

export interface ErrorPayload {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
