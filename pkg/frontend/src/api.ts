/**
 * Thin typed client over the review-service HTTP API.
 *
 * The workbench is a pure API client: every mutation below maps to exactly
 * one documented route and no client-side state is authoritative.
 */

import type {
  BlocksResponse,
  BlockStateWire,
  GraphWire,
  JobWire,
  TraceWire,
} from './model.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export interface ReviewResult {
  kind: string;
  state: BlockStateWire;
  stale_descendants: string[];
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async uploadScenario(pkg: unknown, map: unknown): Promise<string> {
    const resp = await fetch(this.url('/scenarios'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ package: pkg, map }),
    });
    const body = await asJson<{ id: string }>(resp);
    return body.id;
  }

  async blocks(scenarioId: string): Promise<BlocksResponse> {
    return asJson(await fetch(this.url(`/scenarios/${scenarioId}/blocks`)));
  }

  async graph(scenarioId: string): Promise<GraphWire> {
    return asJson(await fetch(this.url(`/scenarios/${scenarioId}/graph`)));
  }

  async seed(scenarioId: string): Promise<string[]> {
    const resp = await fetch(this.url(`/scenarios/${scenarioId}/blocks/seed`), {
      method: 'POST',
    });
    const body = await asJson<{ seeded: string[] }>(resp);
    return body.seeded;
  }

  async generate(scenarioId: string, kind: string): Promise<string> {
    const resp = await fetch(
      this.url(`/scenarios/${scenarioId}/blocks/${kind}/generate`),
      { method: 'POST' },
    );
    const body = await asJson<{ job_id: string }>(resp);
    return body.job_id;
  }

  async job(jobId: string): Promise<JobWire> {
    return asJson(await fetch(this.url(`/jobs/${jobId}`)));
  }

  private async review(
    scenarioId: string,
    kind: string,
    action: string,
    body?: unknown,
  ): Promise<ReviewResult> {
    const resp = await fetch(
      this.url(`/scenarios/${scenarioId}/blocks/${kind}/${action}`),
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: body === undefined ? '{}' : JSON.stringify(body),
      },
    );
    return asJson(resp);
  }

  approve(scenarioId: string, kind: string): Promise<ReviewResult> {
    return this.review(scenarioId, kind, 'approve');
  }

  reject(scenarioId: string, kind: string, feedback: string): Promise<ReviewResult> {
    return this.review(scenarioId, kind, 'reject', { feedback });
  }

  edit(scenarioId: string, kind: string, content: string): Promise<ReviewResult> {
    return this.review(scenarioId, kind, 'edit', { content });
  }

  selectOption(scenarioId: string, kind: string, index: number): Promise<ReviewResult> {
    return this.review(scenarioId, kind, 'select-option', { index });
  }

  async trace(scenarioId: string, kind: string): Promise<TraceWire> {
    return asJson(
      await fetch(this.url(`/scenarios/${scenarioId}/blocks/${kind}/trace`)),
    );
  }

  artifactUrl(scenarioId: string, imageRef: string): string {
    return this.url(`/scenarios/${scenarioId}/artifacts/${imageRef}`);
  }

  overlayUrl(scenarioId: string, params: Record<string, string>): string {
    const query = new URLSearchParams(params).toString();
    return this.url(`/scenarios/${scenarioId}/overlay${query ? `?${query}` : ''}`);
  }
}
