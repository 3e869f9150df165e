/** Thin fetch client for the /v1 HTTP surface. */

import type { ActionEntry, EpisodeRecord, SessionState, TraceView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public kind: string,
    detail: string,
  ) {
    super(detail);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let kind = "HttpError";
    let detail = `${response.status}`;
    try {
      const body = (await response.json()) as { error?: string; detail?: string };
      kind = body.error ?? kind;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, kind, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson<T>(response);
  }

  private async get<T>(path: string): Promise<T> {
    return asJson<T>(await fetch(this.baseUrl + path));
  }

  createSession(config: unknown): Promise<{ id: string; status: string }> {
    return this.post("/v1/sessions", config);
  }

  sendMessage(sessionId: string, text: string): Promise<EpisodeRecord> {
    return this.post(`/v1/sessions/${sessionId}/message`, { text });
  }

  perturb(
    sessionId: string,
    body: {
      object_id: string;
      at_step?: number | null;
      new_zone?: string | null;
      new_cell?: number[] | null;
    },
  ): Promise<{ ok: boolean }> {
    return this.post(`/v1/sessions/${sessionId}/perturb`, body);
  }

  resetWorld(sessionId: string): Promise<{ ok: boolean }> {
    return this.post(`/v1/sessions/${sessionId}/reset_world`, {});
  }

  state(sessionId: string): Promise<SessionState> {
    return this.get(`/v1/sessions/${sessionId}/state`);
  }

  trace(sessionId: string): Promise<TraceView> {
    return this.get(`/v1/sessions/${sessionId}/trace`);
  }

  actions(): Promise<ActionEntry[]> {
    return this.get("/v1/actions");
  }

  eventsUrl(sessionId: string, after: number, follow: boolean): string {
    return `${this.baseUrl}/v1/sessions/${sessionId}/events?after=${after}&follow=${follow}`;
  }
}
