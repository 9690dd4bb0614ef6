import { describe, expect, it } from "vitest";

import { PendingQueue } from "../src/queue.js";
import type { QueuedRelabel } from "../src/queue.js";

const entry = (i: number, label = "Relevant" as const): QueuedRelabel => ({
  id: `t${i}`,
  text: `text ${i}`,
  label,
});

describe("PendingQueue", () => {
  it("becomes ready at exactly the threshold of unique ids", () => {
    const q = new PendingQueue(10);
    for (let i = 0; i < 9; i++) q.put(entry(i));
    expect(q.ready).toBe(false);
    q.put(entry(0, "Can't Decide")); // duplicate id: still 9 unique
    expect(q.size).toBe(9);
    expect(q.ready).toBe(false);
    q.put(entry(9));
    expect(q.ready).toBe(true);
  });

  it("relabeling the same row before dispatch keeps one entry with the latest label", () => {
    const q = new PendingQueue(10);
    q.put(entry(1, "Relevant"));
    q.put({ id: "t1", text: "text 1", label: "Not Relevant" });
    expect(q.size).toBe(1);
    expect(q.snapshot()[0].label).toBe("Not Relevant");
  });

  it("takeBatch returns exactly threshold entries and leaves the rest queued", () => {
    const q = new PendingQueue(10);
    for (let i = 0; i < 13; i++) q.put(entry(i));
    const batch = q.takeBatch();
    expect(batch.map((e) => e.id)).toEqual(
      Array.from({ length: 10 }, (_, i) => `t${i}`),
    );
    expect(q.size).toBe(3);
  });

  it("restore puts failed entries back unless the id was re-labeled meanwhile", () => {
    const q = new PendingQueue(10);
    for (let i = 0; i < 10; i++) q.put(entry(i));
    const batch = q.takeBatch();
    q.put({ id: "t3", text: "text 3", label: "Can't Decide" }); // newer relabel
    q.restore(batch);
    expect(q.size).toBe(10);
    const t3 = q.snapshot().find((e) => e.id === "t3");
    expect(t3?.label).toBe("Can't Decide"); // the newer entry won
  });

  it("rejects non-positive thresholds", () => {
    expect(() => new PendingQueue(0)).toThrow();
  });
});
