/** Neighborhood picker: checkbox + preference slider per in-scope topic. */

import type { NeighborRow } from "./api.js";

export interface PickerState {
  hops: number;
  rows: NeighborRow[];
  selected: Map<string, number>; // label -> preference
}

export const MAX_MENTIONS = 3;
export const SLIDER_STEP = 0.05;
export const DEFAULT_PREFERENCE = 0.5;

export function clampPreference(value: number): number {
  const snapped = Math.round(value / SLIDER_STEP) * SLIDER_STEP;
  return Math.min(1, Math.max(0, Number(snapped.toFixed(2))));
}

export function makePicker(hops: number, rows: NeighborRow[], excludeLabel: string | null): PickerState {
  return {
    hops,
    rows: rows.filter((r) => r.label !== excludeLabel),
    selected: new Map(),
  };
}

export function toggleTopic(state: PickerState, label: string): boolean {
  if (state.selected.has(label)) {
    state.selected.delete(label);
    return true;
  }
  if (state.selected.size >= MAX_MENTIONS) {
    return false; // blocked client-side before any network call
  }
  state.selected.set(label, DEFAULT_PREFERENCE);
  return true;
}

export function setPreference(state: PickerState, label: string, value: number): void {
  if (state.selected.has(label)) {
    state.selected.set(label, clampPreference(value));
  }
}

export function renderPicker(root: HTMLElement, state: PickerState,
                             onToggle: (label: string) => void,
                             onSlide: (label: string, value: number) => void): void {
  root.innerHTML = "";
  const list = document.createElement("ul");
  list.className = "picker-list";
  for (const row of state.rows) {
    const item = document.createElement("li");
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.dataset.label = row.label;
    checkbox.checked = state.selected.has(row.label);
    checkbox.addEventListener("change", () => onToggle(row.label));
    const name = document.createElement("span");
    name.textContent = `${row.label} (${row.hops} hop${row.hops > 1 ? "s" : ""})`;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = String(SLIDER_STEP);
    slider.value = String(state.selected.get(row.label) ?? DEFAULT_PREFERENCE);
    slider.disabled = !state.selected.has(row.label);
    slider.dataset.label = row.label;
    slider.addEventListener("input", () => onSlide(row.label, Number(slider.value)));
    item.append(checkbox, name, slider);
    list.append(item);
  }
  root.append(list);
}
