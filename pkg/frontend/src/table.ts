/** HTML rendering for the labeling table (string-based, DOM-free). */

import { labelColor, renderProbBar } from "./bars.js";
import type { Sort, ViewState } from "./state.js";
import type { Label, TableRow } from "./types.js";
import { LABELS } from "./types.js";

const SPINNER = `<span class="spinner" aria-label="fetching labels">⟳</span>`;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function sortMarker(sort: Sort, cls: Label): string {
  if (sort.kind !== "prob" || sort.cls !== cls) return "";
  return sort.dir === "desc" ? " ▾" : " ▴";
}

export function renderHeader(state: ViewState): string {
  const probHeaders = LABELS.map(
    (cls) =>
      `<th class="prob-header" data-cls="${cls}">` +
      `${cls}${sortMarker(state.sort, cls)}</th>`,
  ).join("");
  const options = ["All", ...LABELS]
    .map(
      (f) =>
        `<option value="${f}"${f === state.filter ? " selected" : ""}>${f}</option>`,
    )
    .join("");
  return (
    `<tr><th>date</th><th>text</th>` +
    `<th>label <select class="filter-select">${options}</select></th>` +
    `${probHeaders}</tr>`
  );
}

export function renderRow(row: TableRow, state: ViewState): string {
  const date = new Date(row.timestamp).toISOString().replace("T", " ").slice(0, 19);
  let labelCell: string;
  let barCell: string;
  if (state.fetchInFlight && !row.userModified) {
    labelCell = SPINNER;
    barCell = SPINNER;
  } else if (row.label === null || row.probs === null) {
    labelCell = row.label
      ? renderLabelChip(row.id, row.label, row.userModified)
      : `<span class="unlabeled">…</span>`;
    barCell = row.probs ? renderProbBar(row.probs) : "";
  } else {
    labelCell = renderLabelChip(row.id, row.label, row.userModified);
    barCell = renderProbBar(row.probs);
  }
  return (
    `<tr data-id="${row.id}"${row.userModified ? ' class="user-modified"' : ""}>` +
    `<td class="date">${date}</td>` +
    `<td class="text">${escapeHtml(row.text)}</td>` +
    `<td class="label">${labelCell}</td>` +
    `<td class="bar" colspan="3">${barCell}</td>` +
    `</tr>`
  );
}

export function renderLabelChip(id: string, label: Label, pinned: boolean): string {
  return (
    `<button class="label-chip" data-id="${id}" data-label="${label}" ` +
    `style="color:#fff;background:${labelColor(label)}">` +
    `${label}${pinned ? " ✎" : ""}</button>`
  );
}

export function renderTable(rows: TableRow[], state: ViewState): string {
  const body = rows.map((r) => renderRow(r, state)).join("\n");
  return `<table class="tweet-table"><thead>${renderHeader(state)}</thead><tbody>${body}</tbody></table>`;
}

export function renderStatus(state: ViewState, queueSize: number, retry: boolean): string {
  const parts = [`<span class="queue-count">${queueSize}/10 queued</span>`];
  if (state.stale) parts.push(`<span class="stale-badge">stale data</span>`);
  if (retry) parts.push(`<button class="retry">retry</button>`);
  return `<div class="status">${parts.join(" ")}</div>`;
}
