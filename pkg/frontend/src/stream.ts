/** Incoming-row sources for the live ticker.
 *
 * The console consumes the replay stream either as a JSON array fetched from
 * a URL (re-polled for appended items, offset-based so nothing is duplicated)
 * or as an in-process source for tests and embedding.
 */

import type { StreamItem } from "./types.js";

export type StreamSink = (item: StreamItem) => void;

export interface StreamSource {
  start(sink: StreamSink): void;
  stop(): void;
}

/** Replays a fixed array at a configurable rate (demo and test source). */
export class ArraySource implements StreamSource {
  private timer: ReturnType<typeof setInterval> | null = null;
  private index = 0;

  constructor(
    private items: StreamItem[],
    private ratePerSecond = 10,
  ) {}

  start(sink: StreamSink): void {
    this.timer = setInterval(() => {
      if (this.index >= this.items.length) {
        this.stop();
        return;
      }
      sink(this.items[this.index++]);
    }, 1000 / this.ratePerSecond);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}

/** Polls a URL returning a JSON array of stream items; only items beyond the
 * last seen offset are delivered. */
export class PollingSource implements StreamSource {
  private timer: ReturnType<typeof setInterval> | null = null;
  private offset = 0;

  constructor(
    private url: string,
    private intervalMs = 2000,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  start(sink: StreamSink): void {
    const poll = async () => {
      try {
        const resp = await this.fetchImpl(this.url);
        if (!resp.ok) return;
        const items = (await resp.json()) as StreamItem[];
        while (this.offset < items.length) sink(items[this.offset++]);
      } catch {
        // transient fetch errors: keep polling
      }
    };
    void poll();
    this.timer = setInterval(() => void poll(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}
