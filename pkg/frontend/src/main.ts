/** Browser bootstrap: wires the controller to the DOM.
 *
 * Query parameters:
 *   ?server=http://127.0.0.1:8080   classifier server base URL
 *   &user=demo&classifier=default   model key
 *   &stream=./stream.json           JSON array to poll for incoming rows
 */

import { RelevanceClient } from "./api.js";
import { renderPerformanceBar } from "./bars.js";
import { ConsoleController } from "./controller.js";
import { PollingSource } from "./stream.js";
import { renderStatus, renderTable } from "./table.js";
import type { Filter } from "./state.js";
import type { Label } from "./types.js";

function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "http://127.0.0.1:8080";
  const key = {
    user_id: params.get("user") ?? "demo",
    classifier_id: params.get("classifier") ?? "default",
  };
  const streamUrl = params.get("stream");

  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  root.innerHTML =
    `<div id="perf"></div><div id="status"></div><div id="table"></div>`;
  const perfEl = document.getElementById("perf")!;
  const statusEl = document.getElementById("status")!;
  const tableEl = document.getElementById("table")!;

  const client = new RelevanceClient({ baseUrl: server, key });
  const controller = new ConsoleController({
    client,
    onRender: () => {
      perfEl.innerHTML = renderPerformanceBar(
        controller.view.nTrained,
        controller.view.estimatedF1,
      );
      statusEl.innerHTML = renderStatus(
        controller.view,
        controller.queue.size,
        controller.retryAvailable,
      );
      tableEl.innerHTML = renderTable(controller.visibleRows(), controller.view);
    },
  });

  tableEl.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const chip = target.closest(".label-chip") as HTMLElement | null;
    if (chip) {
      const id = chip.dataset.id!;
      const current = chip.dataset.label as Label;
      const choices = ConsoleController.relabelChoices(current);
      const answer = window.prompt(
        `Relabel as:\n1) ${choices[0]}\n2) ${choices[1]}`,
        "1",
      );
      const pick = answer === "2" ? choices[1] : answer === "1" ? choices[0] : null;
      if (pick) void controller.relabel(id, pick);
      return;
    }
    const header = target.closest(".prob-header") as HTMLElement | null;
    if (header) controller.clickProbHeader(header.dataset.cls as Label);
  });
  tableEl.addEventListener("change", (event) => {
    const select = event.target as HTMLSelectElement;
    if (select.classList.contains("filter-select")) {
      controller.setFilter(select.value as Filter);
    }
  });
  statusEl.addEventListener("click", (event) => {
    if ((event.target as HTMLElement).classList.contains("retry")) {
      void controller.retry();
    }
  });

  void client.init().then(() => controller.refreshLabels());
  controller.startPolling();
  if (streamUrl) {
    new PollingSource(streamUrl).start((item) => controller.ingest(item));
  }
}

bootstrap();
