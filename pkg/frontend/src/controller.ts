/** Console controller: row store, relabel queue, label refresh, polling.
 *
 * Behavior contract:
 *  - a relabel updates the row locally (pinned), queues it, and once 10
 *    unique ids are pending fires exactly one training request with those 10;
 *  - after training completes the visible set is re-fetched for fresh
 *    predictions (user-modified rows are never overwritten);
 *  - a failed or timed-out request keeps the queue and shows a retry
 *    affordance; one training request is in flight at a time.
 */

import { ApiTimeoutError, RelevanceClient } from "./api.js";
import { PendingQueue } from "./queue.js";
import { cycleSort, filterAndSort, initialViewState } from "./state.js";
import type { Filter, ViewState } from "./state.js";
import type { Label, StreamItem, TableRow } from "./types.js";

export interface ControllerOptions {
  client: RelevanceClient;
  queueThreshold?: number;
  pollIntervalMs?: number; // label refresh cadence, default 5s
  onRender?: () => void;
}

export class ConsoleController {
  readonly rows = new Map<string, TableRow>();
  readonly queue: PendingQueue;
  view: ViewState = initialViewState();
  trainInFlight = false;
  retryAvailable = false;
  private client: RelevanceClient;
  private onRender: () => void;
  readonly pollIntervalMs: number;

  constructor(opts: ControllerOptions) {
    this.client = opts.client;
    this.queue = new PendingQueue(opts.queueThreshold ?? 10);
    this.pollIntervalMs = opts.pollIntervalMs ?? 5_000;
    this.onRender = opts.onRender ?? (() => {});
  }

  /** Rows currently visible under the active filter and sort. */
  visibleRows(): TableRow[] {
    return filterAndSort([...this.rows.values()], this.view);
  }

  ingest(item: StreamItem): void {
    if (this.rows.has(item.id)) return; // replay duplicates are dropped
    this.rows.set(item.id, {
      id: item.id,
      timestamp: item.timestamp ?? Date.now(),
      text: item.text,
      label: null,
      probs: null,
      userModified: false,
    });
    this.onRender();
  }

  setFilter(filter: Filter): void {
    this.view = { ...this.view, filter };
    this.onRender();
  }

  clickProbHeader(cls: Label): void {
    this.view = { ...this.view, sort: cycleSort(this.view.sort, cls) };
    this.onRender();
  }

  /** The two labels a click on `current` offers as replacements. */
  static relabelChoices(current: Label): Label[] {
    const all: Label[] = ["Relevant", "Not Relevant", "Can't Decide"];
    return all.filter((l) => l !== current);
  }

  async relabel(id: string, newLabel: Label): Promise<void> {
    const row = this.rows.get(id);
    if (!row) throw new Error(`no row with id ${id}`);
    row.label = newLabel;
    row.userModified = true; // pinned from now on
    this.queue.put({ id, text: row.text, label: newLabel });
    this.onRender();
    await this.maybeDispatch();
  }

  async maybeDispatch(): Promise<void> {
    if (this.trainInFlight || !this.queue.ready) return;
    const batch = this.queue.takeBatch();
    this.trainInFlight = true;
    this.retryAvailable = false;
    this.onRender();
    try {
      const resp = await this.client.updateLabels(
        batch.map(({ id, text, label }) => ({ id, text, label })),
      );
      this.view = { ...this.view, nTrained: resp.n_trained, estimatedF1: resp.estimated_f1 };
    } catch (err) {
      this.queue.restore(batch); // a relabel is never lost
      this.retryAvailable = true;
      this.view = { ...this.view, stale: err instanceof ApiTimeoutError };
      this.onRender();
      this.trainInFlight = false;
      return;
    }
    this.trainInFlight = false;
    this.onRender();
    await this.refreshLabels(); // another round of prediction for the visible set
    if (this.queue.ready) await this.maybeDispatch();
  }

  /** Retry affordance after a failed dispatch or label fetch. */
  async retry(): Promise<void> {
    this.view = { ...this.view, stale: false };
    this.retryAvailable = false;
    if (this.queue.ready) {
      await this.maybeDispatch();
    } else {
      await this.refreshLabels();
    }
  }

  /** Re-fetch predictions for the visible set; pinned rows keep the user's
   * label while everything else takes the model's fresh prediction. */
  async refreshLabels(): Promise<void> {
    const visible = this.visibleRows();
    if (visible.length === 0) {
      return;
    }
    this.view = { ...this.view, fetchInFlight: true };
    this.onRender();
    try {
      const resp = await this.client.getLabels(
        visible.map(({ id, text }) => ({ id, text })),
      );
      for (const wire of resp.labels) {
        const row = this.rows.get(wire.id);
        if (!row || row.userModified) continue; // user labels override the model's
        row.label = wire.label;
        row.probs = wire.probs;
      }
      this.view = {
        ...this.view,
        nTrained: resp.n_trained,
        estimatedF1: resp.estimated_f1,
        fetchInFlight: false,
        stale: false,
      };
    } catch (err) {
      this.view = {
        ...this.view,
        fetchInFlight: false,
        stale: err instanceof ApiTimeoutError,
      };
      this.retryAvailable = true;
    }
    this.onRender();
  }

  /** Timer-driven polling loop; returns a stop function. */
  startPolling(setIntervalImpl = setInterval, clearIntervalImpl = clearInterval): () => void {
    const handle = setIntervalImpl(() => {
      if (!this.view.fetchInFlight && !this.trainInFlight) void this.refreshLabels();
    }, this.pollIntervalMs);
    return () => clearIntervalImpl(handle);
  }
}
