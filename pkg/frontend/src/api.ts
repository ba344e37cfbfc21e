// Typed client for the layout service with optimistic-concurrency retry.

import type { Edit, EditResult, SessionCreated, Solution, SolutionResponse } from "./types.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    public status: number,
    public body: unknown,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    public baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
  }

  async createSession(spec: string): Promise<SessionCreated> {
    const response = await this.request("/v1/sessions", {
      method: "POST",
      body: JSON.stringify({ spec }),
    });
    const body = await response.json();
    if (response.status !== 201) {
      throw new ServiceError("create failed", response.status, body);
    }
    return body as SessionCreated;
  }

  async getSolution(id: string, viewport?: { width: number; height: number }): Promise<SolutionResponse> {
    const query = viewport ? `?width=${viewport.width}&height=${viewport.height}` : "";
    const response = await this.request(`/v1/sessions/${id}/solution${query}`);
    const body = await response.json();
    if (!response.ok) {
      throw new ServiceError("solution fetch failed", response.status, body);
    }
    return body as SolutionResponse;
  }

  async getSpec(id: string): Promise<string> {
    const response = await this.request(`/v1/sessions/${id}/spec`);
    const body = await response.json();
    if (!response.ok) {
      throw new ServiceError("spec fetch failed", response.status, body);
    }
    return (body as { spec: string }).spec;
  }

  async deleteSession(id: string): Promise<void> {
    await this.request(`/v1/sessions/${id}`, { method: "DELETE" });
  }

  async applyEdit(id: string, expectedRevision: number, edit: Edit): Promise<EditResult> {
    const response = await this.request(`/v1/sessions/${id}/edits`, {
      method: "POST",
      body: JSON.stringify({ expected_revision: expectedRevision, edit }),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (response.ok) {
      return { kind: "ok", revision: body.revision as number, solution: body.solution as Solution };
    }
    if (response.status === 409 && Array.isArray(body.conflicts)) {
      return { kind: "conflict", conflicts: body.conflicts as string[] };
    }
    if (response.status === 409 && body.error === "revision mismatch") {
      return { kind: "stale", actual: body.actual as number };
    }
    return { kind: "invalid", reason: String(body.error ?? response.status) };
  }

  /** Apply an edit; on a revision mismatch, refetch and retry transparently once. */
  async applyEditWithRetry(id: string, expectedRevision: number, edit: Edit): Promise<EditResult> {
    const first = await this.applyEdit(id, expectedRevision, edit);
    if (first.kind !== "stale") {
      return first;
    }
    return this.applyEdit(id, first.actual, edit);
  }
}
