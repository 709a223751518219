/** Gauge rendering: every displayed number is echoed from server
 * diagnostics; nothing is computed client-side. */

import type { SessionView } from "./api.js";

export function sparklinePath(series: number[], width = 160, height = 36): string {
  if (series.length === 0) return "";
  const step = series.length > 1 ? width / (series.length - 1) : 0;
  return series
    .map((v, i) => {
      const x = (i * step).toFixed(1);
      const y = (height - v * height).toFixed(1);
      return `${i === 0 ? "M" : "L"}${x},${y}`;
    })
    .join(" ");
}

export function gwSeries(view: SessionView): number[] {
  return view.diagnostics.filter((d) => d.gw !== null).map((d) => d.gw as number);
}

export function renderGauges(root: HTMLElement, view: SessionView): void {
  const last = view.diagnostics[view.diagnostics.length - 1];
  const series = gwSeries(view);
  const gwText = last && last.gw !== null ? (last.gw as number).toFixed(3) : "n/a";
  const dist = last ? String(last.est_distance_to_goal) : "n/a";
  const eus = last ? last.est_satisfaction.toFixed(3) : "n/a";
  const turn = `${view.turns.length + (view.pending_topic ? 1 : 0)} / ${view.turn_limit}`;
  root.innerHTML = `
    <div class="gauge"><span class="label">goal weight</span>
      <svg viewBox="0 0 160 36" width="160" height="36" data-testid="gw-sparkline"
           data-points="${series.length}"><path d="${sparklinePath(series)}"
           fill="none" stroke="#2563eb" stroke-width="2"/></svg>
      <span class="value" data-testid="gw-value">${gwText}</span></div>
    <div class="gauge"><span class="label">est. distance to goal</span>
      <span class="value" data-testid="distance-value">${dist}</span></div>
    <div class="gauge"><span class="label">est. satisfaction</span>
      <span class="value" data-testid="eus-value">${eus}</span></div>
    <div class="gauge"><span class="label">turn</span>
      <span class="value" data-testid="turn-value">${turn}</span></div>`;
}
