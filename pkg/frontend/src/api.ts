/** Thin client for the classifier server's three endpoints. The fetch
 * implementation is injectable so tests can script the server. */

import type {
  GetLabelsResponse,
  Label,
  ModelKey,
  UpdateLabelsResponse,
} from "./types.js";

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export interface ApiOptions {
  baseUrl: string;
  key: ModelKey;
  fetchImpl?: FetchLike;
  timeoutMs?: number; // a fetch slower than this shows the stale badge
}

export class ApiTimeoutError extends Error {
  constructor(ms: number) {
    super(`request timed out after ${ms}ms`);
  }
}

export class RelevanceClient {
  private fetchImpl: FetchLike;
  readonly timeoutMs: number;

  constructor(private opts: ApiOptions) {
    this.fetchImpl = opts.fetchImpl ?? ((url, init) => fetch(url, init));
    this.timeoutMs = opts.timeoutMs ?? 10_000;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const request = this.fetchImpl(`${this.opts.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const timeout = new Promise<never>((_, reject) =>
      setTimeout(() => reject(new ApiTimeoutError(this.timeoutMs)), this.timeoutMs),
    );
    const resp = await Promise.race([request, timeout]);
    if (!resp.ok) {
      const detail = await resp.text().catch(() => "");
      throw new Error(`${path} failed: HTTP ${resp.status} ${detail}`);
    }
    return (await resp.json()) as T;
  }

  init(modelType?: string): Promise<{ model_key: ModelKey; created: boolean }> {
    return this.post("/init/", {
      user_id: this.opts.key.user_id,
      classifier_id: this.opts.key.classifier_id,
      ...(modelType ? { model_type: modelType } : {}),
    });
  }

  getLabels(tweets: { id: string; text: string }[]): Promise<GetLabelsResponse> {
    return this.post("/getLabels/", { model_key: this.opts.key, tweets });
  }

  updateLabels(
    examples: { id: string; text: string; label: Label }[],
  ): Promise<UpdateLabelsResponse> {
    return this.post("/updateLabels/", { model_key: this.opts.key, examples });
  }
}
