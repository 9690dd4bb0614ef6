/** Pending relabel queue: dispatches batches of exactly `threshold` unique
 * text ids. Relabeling the same id before dispatch replaces its entry
 * (latest label wins), so an id is never queued twice. */

import type { Label } from "./types.js";

export interface QueuedRelabel {
  id: string;
  text: string;
  label: Label;
}

export class PendingQueue {
  private entries = new Map<string, QueuedRelabel>();

  constructor(readonly threshold: number = 10) {
    if (threshold < 1) throw new Error(`threshold must be >= 1, got ${threshold}`);
  }

  get size(): number {
    return this.entries.size;
  }

  has(id: string): boolean {
    return this.entries.has(id);
  }

  put(item: QueuedRelabel): void {
    // re-put keeps first-queued order but carries the latest label
    this.entries.set(item.id, item);
  }

  get ready(): boolean {
    return this.entries.size >= this.threshold;
  }

  /** Remove and return the first `threshold` queued entries (all of them if
   * fewer); later entries stay queued for the next dispatch. */
  takeBatch(): QueuedRelabel[] {
    const batch: QueuedRelabel[] = [];
    for (const [id, entry] of this.entries) {
      if (batch.length === this.threshold) break;
      batch.push(entry);
      void id;
    }
    for (const entry of batch) this.entries.delete(entry.id);
    return batch;
  }

  /** Return failed entries to the queue unless the user re-labeled the id
   * while the request was in flight (the newer entry wins). */
  restore(batch: QueuedRelabel[]): void {
    const newer = new Map(this.entries);
    this.entries = new Map();
    for (const entry of batch) {
      if (!newer.has(entry.id)) this.entries.set(entry.id, entry);
    }
    for (const [id, entry] of newer) this.entries.set(id, entry);
  }

  snapshot(): QueuedRelabel[] {
    return [...this.entries.values()];
  }
}
