/** Segmented probability bars and the model-performance bar. */

import type { Label, Probs } from "./types.js";
import { LABELS, LABEL_COLORS } from "./types.js";

/** Integer pixel widths proportional to probs, summing exactly to totalPx.
 * Largest-remainder rounding keeps every segment within 1px of exact. */
export function segmentWidths(probs: Probs, totalPx: number): [number, number, number] {
  const exact = probs.map((p) => p * totalPx);
  const floors = exact.map(Math.floor);
  let remaining = totalPx - floors.reduce((a, b) => a + b, 0);
  const order = exact
    .map((x, i) => ({ i, frac: x - Math.floor(x) }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  const widths = [...floors] as [number, number, number];
  for (const { i } of order) {
    if (remaining <= 0) break;
    widths[i] += 1;
    remaining -= 1;
  }
  return widths;
}

export function renderProbBar(probs: Probs, totalPx = 160): string {
  const widths = segmentWidths(probs, totalPx);
  const segments = LABELS.map((label, i) => {
    const pct = (probs[i] * 100).toFixed(1);
    return (
      `<span class="bar-seg" title="${label}: ${pct}%" ` +
      `style="display:inline-block;width:${widths[i]}px;height:12px;` +
      `background:${LABEL_COLORS[label]}"></span>`
    );
  });
  return `<span class="prob-bar" style="width:${totalPx}px">${segments.join("")}</span>`;
}

/** The live reliability proxy. The estimate comes from the server response;
 * the client never re-derives it from a formula. */
export function renderPerformanceBar(
  nTrained: number,
  estimatedF1: number | null,
  totalPx = 240,
): string {
  const est = estimatedF1 ?? 0;
  const fillPx = Math.round(Math.min(Math.max(est, 0), 1) * totalPx);
  const pctText = estimatedF1 === null ? "n/a" : `${(est * 100).toFixed(1)}%`;
  return (
    `<div class="perf-bar" data-n-trained="${nTrained}" data-estimate="${est}">` +
    `<div class="perf-track" style="width:${totalPx}px;height:10px;background:#e3e8ef">` +
    `<div class="perf-fill" style="width:${fillPx}px;height:10px;background:#4a90d9"></div>` +
    `</div>` +
    `<span class="perf-text">estimated F1 ${pctText} · ${nTrained} labeled</span>` +
    `</div>`
  );
}

export function labelColor(label: Label): string {
  return LABEL_COLORS[label];
}
