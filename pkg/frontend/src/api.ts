// Thin client for the annotation service. All state lives on the server;
// mutating posts are idempotent under identical retries, so a single
// automatic retry after a network failure cannot double-submit.

import type {
  Axis,
  Choice,
  ErrorPayload,
  NextTaskPayload,
  SessionPayload,
  SubmitAxesPayload,
  TaskPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private token: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    retryOnNetworkError = false,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const init: RequestInit = {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    };
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      if (!retryOnNetworkError) throw err;
      // one retry with the identical payload; the server deduplicates
      response = await this.fetchFn(this.baseUrl + path, init);
    }
    const payload = await response.json();
    if (!response.ok) {
      const e = payload as ErrorPayload;
      throw new ApiError(response.status, e.code, e.message, e.details ?? {});
    }
    return payload as T;
  }

  async openSession(raterId: string): Promise<SessionPayload> {
    const session = await this.request<SessionPayload>("POST", "/sessions", {
      rater_id: raterId,
    });
    this.token = session.token;
    return session;
  }

  nextTask(): Promise<NextTaskPayload> {
    return this.request<NextTaskPayload>("GET", "/tasks/next");
  }

  submitOverall(
    taskId: string,
    choice: Choice,
    playbackProof: boolean,
  ): Promise<TaskPayload> {
    return this.request<TaskPayload>(
      "POST",
      `/tasks/${taskId}/overall`,
      { choice, playback_proof: playbackProof },
      true,
    );
  }

  submitAxes(
    taskId: string,
    axes: Record<Axis, Choice>,
  ): Promise<SubmitAxesPayload> {
    return this.request<SubmitAxesPayload>(
      "POST",
      `/tasks/${taskId}/axes`,
      { axes },
      true,
    );
  }

  advanceQualification(
    raterId: string,
    stage: "screening" | "justification" | "training",
    passed: boolean,
  ): Promise<{ rater_id: string; state: string }> {
    return this.request("POST", `/raters/${raterId}/qualification`, {
      stage,
      passed,
    });
  }
}
