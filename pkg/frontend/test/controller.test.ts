import { describe, expect, it } from "vitest";

import { RelevanceClient } from "../src/api.js";
import { ConsoleController } from "../src/controller.js";
import type { FetchLike } from "../src/api.js";
import type { Label, Probs, WireLabel } from "../src/types.js";

interface Recorded {
  path: string;
  body: any;
}

/** Scripted server stub: records requests, answers from a playbook. */
function makeStub(opts?: {
  failUpdates?: number; // fail the first N update requests
  probsFor?: (id: string) => Probs;
  estimatedF1?: number;
}) {
  const requests: Recorded[] = [];
  let nTrained = 0;
  let failLeft = opts?.failUpdates ?? 0;
  const probsFor = opts?.probsFor ?? (() => [0.8, 0.15, 0.05] as Probs);

  const fetchImpl: FetchLike = async (url, init) => {
    const path = new URL(url).pathname;
    const body = JSON.parse(String(init.body));
    requests.push({ path, body });
    if (path === "/updateLabels/") {
      if (failLeft > 0) {
        failLeft -= 1;
        return new Response("boom", { status: 500 });
      }
      nTrained += body.examples.length;
      return Response.json({
        status: "ok",
        n_trained: nTrained,
        estimated_f1: opts?.estimatedF1 ?? 0.42,
        train_seconds: 0.01,
      });
    }
    if (path === "/getLabels/") {
      const labels: WireLabel[] = body.tweets.map((t: { id: string }) => ({
        id: t.id,
        label: "Relevant" as Label,
        probs: probsFor(t.id),
      }));
      return Response.json({
        labels,
        n_trained: nTrained,
        estimated_f1: opts?.estimatedF1 ?? 0.42,
      });
    }
    if (path === "/init/") {
      return Response.json({ model_key: body, created: true });
    }
    return new Response("not found", { status: 404 });
  };
  return { fetchImpl, requests, updates: () => requests.filter((r) => r.path === "/updateLabels/") };
}

function makeController(stub: ReturnType<typeof makeStub>, threshold = 10) {
  const client = new RelevanceClient({
    baseUrl: "http://server.test",
    key: { user_id: "u", classifier_id: "c" },
    fetchImpl: stub.fetchImpl,
    timeoutMs: 200,
  });
  const controller = new ConsoleController({ client, queueThreshold: threshold });
  for (let i = 0; i < 15; i++) {
    controller.ingest({ id: `t${i}`, text: `tweet number ${i}`, timestamp: 1000 + i });
  }
  return controller;
}

describe("queue dispatch", () => {
  it("relabeling 10 rows fires exactly one training request with those 10 ids", async () => {
    const stub = makeStub();
    const controller = makeController(stub);
    for (let i = 0; i < 9; i++) {
      await controller.relabel(`t${i}`, "Not Relevant");
      expect(stub.updates()).toHaveLength(0);
    }
    await controller.relabel("t9", "Not Relevant");
    const updates = stub.updates();
    expect(updates).toHaveLength(1);
    const ids = updates[0].body.examples.map((e: { id: string }) => e.id);
    expect(ids).toEqual(Array.from({ length: 10 }, (_, i) => `t${i}`));
    expect(updates[0].body.examples.every((e: { label: string }) => e.label === "Not Relevant")).toBe(true);
  });

  it("relabeling the same row repeatedly counts one unique id with the latest label", async () => {
    const stub = makeStub();
    const controller = makeController(stub);
    await controller.relabel("t0", "Not Relevant");
    await controller.relabel("t0", "Can't Decide");
    for (let i = 1; i < 9; i++) await controller.relabel(`t${i}`, "Not Relevant");
    expect(stub.updates()).toHaveLength(0); // 9 unique, not 10
    await controller.relabel("t9", "Not Relevant");
    const [update] = stub.updates();
    const t0 = update.body.examples.find((e: { id: string }) => e.id === "t0");
    expect(t0.label).toBe("Can't Decide");
  });

  it("an 11th relabel stays queued for the next batch", async () => {
    const stub = makeStub();
    const controller = makeController(stub);
    for (let i = 0; i < 11; i++) await controller.relabel(`t${i}`, "Not Relevant");
    expect(stub.updates()).toHaveLength(1);
    expect(stub.updates()[0].body.examples).toHaveLength(10);
    expect(controller.queue.size).toBe(1);
  });
});

describe("after training", () => {
  it("re-fetches the visible set for another round of prediction", async () => {
    const stub = makeStub();
    const controller = makeController(stub);
    for (let i = 0; i < 10; i++) await controller.relabel(`t${i}`, "Not Relevant");
    const fetches = stub.requests.filter((r) => r.path === "/getLabels/");
    expect(fetches).toHaveLength(1);
    expect(fetches[0].body.tweets.map((t: { id: string }) => t.id)).toEqual(
      controller.visibleRows().map((r) => r.id),
    );
  });

  it("pinned user labels are never overwritten by re-prediction", async () => {
    const stub = makeStub(); // stub predicts Relevant for everything
    const controller = makeController(stub);
    for (let i = 0; i < 10; i++) await controller.relabel(`t${i}`, "Can't Decide");
    for (let i = 0; i < 10; i++) {
      const row = controller.rows.get(`t${i}`)!;
      expect(row.label).toBe("Can't Decide");
      expect(row.userModified).toBe(true);
    }
    // untouched rows took the model's prediction
    expect(controller.rows.get("t12")!.label).toBe("Relevant");
  });

  it("performance numbers come from the server response verbatim", async () => {
    const stub = makeStub({ estimatedF1: 0.634465 });
    const controller = makeController(stub);
    for (let i = 0; i < 10; i++) await controller.relabel(`t${i}`, "Not Relevant");
    expect(controller.view.nTrained).toBe(10);
    expect(controller.view.estimatedF1).toBe(0.634465);
  });
});

describe("failure handling", () => {
  it("a failed dispatch keeps every relabel queued and offers a retry", async () => {
    const stub = makeStub({ failUpdates: 1 });
    const controller = makeController(stub);
    for (let i = 0; i < 10; i++) await controller.relabel(`t${i}`, "Not Relevant");
    expect(stub.updates()).toHaveLength(1); // the failed one
    expect(controller.queue.size).toBe(10); // nothing lost
    expect(controller.retryAvailable).toBe(true);
    await controller.retry();
    expect(stub.updates()).toHaveLength(2);
    expect(controller.queue.size).toBe(0);
    expect(controller.retryAvailable).toBe(false);
  });

  it("a timed-out label fetch flags stale data", async () => {
    const never: FetchLike = () => new Promise(() => {});
    const client = new RelevanceClient({
      baseUrl: "http://server.test",
      key: { user_id: "u", classifier_id: "c" },
      fetchImpl: never,
      timeoutMs: 20,
    });
    const controller = new ConsoleController({ client });
    controller.ingest({ id: "t0", text: "hello" });
    await controller.refreshLabels();
    expect(controller.view.stale).toBe(true);
    expect(controller.retryAvailable).toBe(true);
  });

  it("spinner state tracks the in-flight label fetch", async () => {
    let release: (r: Response) => void = () => {};
    const gated: FetchLike = () => new Promise((resolve) => (release = resolve));
    const client = new RelevanceClient({
      baseUrl: "http://server.test",
      key: { user_id: "u", classifier_id: "c" },
      fetchImpl: gated,
      timeoutMs: 1000,
    });
    const controller = new ConsoleController({ client });
    controller.ingest({ id: "t0", text: "hello" });
    const pending = controller.refreshLabels();
    expect(controller.view.fetchInFlight).toBe(true);
    release(
      Response.json({
        labels: [{ id: "t0", label: "Relevant", probs: [0.8, 0.1, 0.1] }],
        n_trained: 0,
        estimated_f1: 0,
      }),
    );
    await pending;
    expect(controller.view.fetchInFlight).toBe(false);
    expect(controller.rows.get("t0")!.label).toBe("Relevant");
  });
});
