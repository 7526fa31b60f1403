// Thin REST client; the server stays the sole validator of specs.

import type { RunLogDocument, SnapshotPayload } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly position?: number,
    readonly line?: number,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function expectJson(response: Response): Promise<any> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(
      body.error ?? "E_HTTP",
      body.message ?? `http ${response.status}`,
      response.status,
      body.position,
      body.line,
    );
  }
  return body;
}

export interface ControlCommand {
  command: "start" | "pause" | "step" | "reset";
  n?: number;
  seed?: number;
}

export class SessionApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    return expectJson(response);
  }

  async createSession(spec: string, provider: string, config: object = {}): Promise<SnapshotPayload> {
    const body = await this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ spec, provider, config }),
    });
    return body.session;
  }

  async listSessions(): Promise<SnapshotPayload[]> {
    const body = await this.request("/sessions");
    return body.sessions;
  }

  async getSession(sessionId: string): Promise<SnapshotPayload> {
    const body = await this.request(`/sessions/${sessionId}`);
    return body.session;
  }

  async control(sessionId: string, command: ControlCommand): Promise<{ status: string; step: number }> {
    return this.request(`/sessions/${sessionId}/control`, {
      method: "POST",
      body: JSON.stringify(command),
    });
  }

  async putConstraints(sessionId: string, spec: string): Promise<SnapshotPayload> {
    const body = await this.request(`/sessions/${sessionId}/constraints`, {
      method: "PUT",
      body: JSON.stringify({ spec }),
    });
    return body.session;
  }

  async exportRun(sessionId: string): Promise<RunLogDocument> {
    return this.request(`/sessions/${sessionId}/export`);
  }

  streamUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/stream`;
  }
}
