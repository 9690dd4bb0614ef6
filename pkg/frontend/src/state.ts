/** View state: relevance filter and the three-step sort cycle.
 *
 * Clicking a probability class sorts by that probability descending; a second
 * click flips to ascending; a third returns to the default date-descending
 * order. Filtering applies before sorting and hidden rows stay in the store.
 */

import type { Label, TableRow } from "./types.js";
import { LABELS } from "./types.js";

export type Filter = "All" | Label;

export type Sort =
  | { kind: "date-desc" }
  | { kind: "prob"; cls: Label; dir: "desc" | "asc" };

export interface ViewState {
  filter: Filter;
  sort: Sort;
  nTrained: number;
  estimatedF1: number | null; // server-provided; never computed client-side
  fetchInFlight: boolean;
  stale: boolean; // label fetch timed out; retry affordance shown
}

export function initialViewState(): ViewState {
  return {
    filter: "All",
    sort: { kind: "date-desc" },
    nTrained: 0,
    estimatedF1: null,
    fetchInFlight: false,
    stale: false,
  };
}

/** Sort-cycle transition for a click on a probability-class header. */
export function cycleSort(current: Sort, cls: Label): Sort {
  if (current.kind !== "prob" || current.cls !== cls) {
    return { kind: "prob", cls, dir: "desc" };
  }
  if (current.dir === "desc") {
    return { kind: "prob", cls, dir: "asc" };
  }
  return { kind: "date-desc" };
}

function probOf(row: TableRow, cls: Label): number {
  if (!row.probs) return -1; // unlabeled rows sink to the bottom
  return row.probs[LABELS.indexOf(cls)];
}

/** Pure: same (rows, state) always renders the same order. */
export function filterAndSort(rows: TableRow[], state: ViewState): TableRow[] {
  const visible =
    state.filter === "All" ? [...rows] : rows.filter((r) => r.label === state.filter);
  const sort = state.sort;
  if (sort.kind === "date-desc") {
    visible.sort((a, b) => b.timestamp - a.timestamp || a.id.localeCompare(b.id));
  } else {
    const sign = sort.dir === "desc" ? -1 : 1;
    visible.sort(
      (a, b) =>
        sign * (probOf(a, sort.cls) - probOf(b, sort.cls)) ||
        b.timestamp - a.timestamp ||
        a.id.localeCompare(b.id),
    );
  }
  return visible;
}
