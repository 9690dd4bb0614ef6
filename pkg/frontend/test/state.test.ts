import { describe, expect, it } from "vitest";

import { cycleSort, filterAndSort, initialViewState } from "../src/state.js";
import type { Sort } from "../src/state.js";
import type { Probs, TableRow } from "../src/types.js";

const row = (
  id: string,
  ts: number,
  label: TableRow["label"],
  probs: Probs | null,
): TableRow => ({
  id,
  timestamp: ts,
  text: `text ${id}`,
  label,
  probs,
  userModified: false,
});

const ROWS: TableRow[] = [
  row("a", 100, "Relevant", [0.7, 0.2, 0.1]),
  row("b", 200, "Not Relevant", [0.2, 0.7, 0.1]),
  row("c", 300, "Relevant", [0.5, 0.3, 0.2]),
  row("d", 400, "Can't Decide", [0.3, 0.3, 0.4]),
];

describe("cycleSort", () => {
  it("cycles desc, asc, then back to the default date order", () => {
    let sort: Sort = { kind: "date-desc" };
    sort = cycleSort(sort, "Relevant");
    expect(sort).toEqual({ kind: "prob", cls: "Relevant", dir: "desc" });
    sort = cycleSort(sort, "Relevant");
    expect(sort).toEqual({ kind: "prob", cls: "Relevant", dir: "asc" });
    sort = cycleSort(sort, "Relevant");
    expect(sort).toEqual({ kind: "date-desc" });
  });

  it("switching to another class restarts at descending", () => {
    const sort = cycleSort({ kind: "prob", cls: "Relevant", dir: "asc" }, "Can't Decide");
    expect(sort).toEqual({ kind: "prob", cls: "Can't Decide", dir: "desc" });
  });
});

describe("filterAndSort", () => {
  it("filters to the selected relevance before sorting", () => {
    const state = { ...initialViewState(), filter: "Relevant" as const };
    const visible = filterAndSort(ROWS, state);
    expect(visible.map((r) => r.id)).toEqual(["c", "a"]); // date desc within filter
  });

  it("hidden rows remain in the caller's store", () => {
    const state = { ...initialViewState(), filter: "Relevant" as const };
    filterAndSort(ROWS, state);
    expect(ROWS).toHaveLength(4);
  });

  it("prob-desc yields a monotone non-increasing probability column", () => {
    const state = {
      ...initialViewState(),
      sort: { kind: "prob", cls: "Relevant", dir: "desc" } as Sort,
    };
    const visible = filterAndSort(ROWS, state);
    const ps = visible.map((r) => r.probs![0]);
    expect(ps).toEqual([...ps].sort((x, y) => y - x));
  });

  it("default order is date descending", () => {
    const visible = filterAndSort(ROWS, initialViewState());
    expect(visible.map((r) => r.id)).toEqual(["d", "c", "b", "a"]);
  });

  it("is pure: same inputs render the same order and mutate nothing", () => {
    const state = {
      ...initialViewState(),
      sort: { kind: "prob", cls: "Not Relevant", dir: "asc" } as Sort,
    };
    const before = ROWS.map((r) => r.id);
    const first = filterAndSort(ROWS, state).map((r) => r.id);
    const second = filterAndSort(ROWS, state).map((r) => r.id);
    expect(first).toEqual(second);
    expect(ROWS.map((r) => r.id)).toEqual(before);
  });
});
