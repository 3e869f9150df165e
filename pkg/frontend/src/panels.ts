/** DOM renderers for each panel.  Every function repaints its panel
 * from a view model; nothing here talks to the network.
 */

import type { BehaviorPanelModel } from "./behavior.js";
import { el, clear } from "./dom.js";
import type { ChatTurn, ComposerModel, LedgerModel } from "./transcript.js";
import type { GridCellView, ZoneCellView } from "./zonemap.js";
import type { StreamEvent } from "./types.js";

export function renderTranscript(root: HTMLElement, turns: ChatTurn[]): void {
  clear(root);
  for (const turn of turns) {
    const bubble = el("div", `turn turn-${turn.role}`);
    bubble.dataset.episode = String(turn.episodeIndex);
    bubble.appendChild(el("div", "turn-text", turn.text));
    const meta = el("div", "turn-meta");
    if (turn.detail) meta.appendChild(el("span", "turn-detail", turn.detail));
    if (turn.badge) {
      meta.appendChild(el("span", `badge badge-${turn.badge.kind}`, turn.badge.text));
    }
    if (meta.childNodes.length) bubble.appendChild(meta);
    root.appendChild(bubble);
  }
  root.scrollTop = root.scrollHeight;
}

export function renderPendingTurn(root: HTMLElement, text: string): void {
  const bubble = el("div", "turn turn-human turn-pending");
  bubble.appendChild(el("div", "turn-text", text));
  bubble.appendChild(el("div", "turn-meta", "sending..."));
  root.appendChild(bubble);
  root.scrollTop = root.scrollHeight;
}

export function markUndelivered(root: HTMLElement, detail: string): void {
  const pending = root.querySelector(".turn-pending");
  if (!pending) return;
  pending.classList.add("turn-undelivered");
  const meta = pending.querySelector(".turn-meta");
  if (meta) meta.textContent = `undelivered: ${detail}`;
}

export function renderComposer(
  form: HTMLElement,
  model: ComposerModel,
  draft: string,
): void {
  const label = form.querySelector(".composer-label") as HTMLElement;
  const input = form.querySelector(".composer-input") as HTMLTextAreaElement;
  const send = form.querySelector(".composer-send") as HTMLButtonElement;
  label.textContent = model.label;
  input.disabled = !model.enabled;
  input.placeholder = model.placeholder;
  send.disabled = !(model.enabled && draft.trim().length > 0);
}

export function renderObservation(root: HTMLElement, lines: string[]): void {
  clear(root);
  for (const line of lines) root.appendChild(el("div", "observation-line", line));
}

export function renderZoneMap(root: HTMLElement, cells: ZoneCellView[][], caption: string): void {
  clear(root);
  const table = el("table", "zone-map");
  for (const row of cells) {
    const tr = el("tr");
    for (const cell of row) {
      const td = el("td", cell.zone ? "zone-cell" : "zone-cell zone-empty");
      if (cell.zone) {
        td.dataset.zone = cell.zone;
        const head = el("div", "zone-name", cell.zone.replace("_", " "));
        if (cell.note) head.appendChild(el("span", "zone-note", ` (${cell.note})`));
        if (cell.armHere) head.appendChild(el("span", "gripper-badge", " ⚙"));
        td.appendChild(head);
        for (const name of cell.objects) td.appendChild(el("div", "zone-object", name));
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  root.appendChild(table);
  root.appendChild(el("div", "zone-caption", caption));
}

export function renderGrid(root: HTMLElement, cells: GridCellView[][]): void {
  clear(root);
  const table = el("table", "jog-grid");
  // far rows first so "forward" moves up the screen
  for (let y = cells.length - 1; y >= 0; y--) {
    const tr = el("tr");
    for (const cell of cells[y]) {
      const td = el("td", "grid-cell");
      td.dataset.cell = `${cell.x},${cell.y}`;
      if (cell.gripperHeight !== null) {
        td.appendChild(el("div", "grid-gripper", `gripper z${cell.gripperHeight}`));
      }
      for (const marker of cell.markers) {
        const kind = marker.startsWith("obstacle") ? "grid-obstacle" : "grid-object";
        td.appendChild(el("div", kind, marker));
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  root.appendChild(table);
}

export function renderBehavior(root: HTMLElement, model: BehaviorPanelModel): void {
  clear(root);
  if (model.kind === "empty") {
    root.appendChild(el("div", "panel-hint", "no behavior yet"));
    return;
  }
  if (model.kind === "raw") {
    const warning = el("div", "behavior-warning", model.warning);
    root.appendChild(warning);
    const pre = el("pre", "behavior-raw");
    const before = model.text.slice(0, model.highlightStart);
    const marked = model.text.slice(model.highlightStart, model.highlightEnd);
    const after = model.text.slice(model.highlightEnd);
    if (before) pre.appendChild(document.createTextNode(before));
    const mark = el("mark", "error-span", "");
    mark.textContent = marked;
    pre.appendChild(mark);
    if (after) pre.appendChild(document.createTextNode(after));
    root.appendChild(pre);
    return;
  }
  const list = el("div", `behavior-${model.kind}`);
  if (model.kind === "sequence") {
    for (const row of model.rows) {
      const div = el("div", `behavior-row step-${row.marker}`);
      div.dataset.step = String(row.index);
      const mark = row.marker === "pass" ? "✓" : row.marker === "fail" ? "✗" : "―";
      div.appendChild(el("span", "step-marker", mark));
      div.appendChild(el("span", "step-name", `${row.index + 1}. ${row.name}`));
      if (row.input) div.appendChild(el("span", "step-input", `"${row.input}"`));
      if (row.output) div.appendChild(el("span", "step-output", row.output));
      list.appendChild(div);
    }
  } else if (model.kind === "tree") {
    for (const line of model.lines) {
      const div = el("div", `behavior-row node-${line.status}`);
      div.style.paddingLeft = `${line.depth * 1.2}rem`;
      let text = line.label;
      if (line.attempts !== null) text += `  [attempts: ${line.attempts}]`;
      div.appendChild(el("span", "node-label", text));
      list.appendChild(div);
    }
  } else {
    for (const state of model.states) {
      const cls = state.active ? "state-active" : state.visited ? "state-visited" : "state-idle";
      const div = el("div", `behavior-row ${cls}`);
      div.dataset.state = state.id;
      list.appendChild(div).appendChild(el("span", "state-label", state.label));
    }
  }
  root.appendChild(list);
}

export function renderLedger(root: HTMLElement, model: LedgerModel): void {
  clear(root);
  const value = el("div", "ledger-value", model.value);
  value.id = "ledger-value";
  root.appendChild(value);
  root.appendChild(el("div", "ledger-line", `failure flags: ${model.flags}`));
  root.appendChild(el("div", "ledger-line", `discount β = ${model.beta}`));
  const timer = el("div", "ledger-line", `task timer: ${model.elapsed}`);
  timer.id = "task-timer";
  timer.dataset.running = model.elapsed === "running" ? "true" : "false";
  root.appendChild(timer);
}

export function renderLatency(root: HTMLElement, readout: string): void {
  root.textContent = readout;
}

export function renderEventLog(root: HTMLElement, events: StreamEvent[]): void {
  clear(root);
  for (const event of events.slice(-200)) {
    const line = el("div", "event-line");
    line.dataset.eventId = String(event.id);
    line.textContent = `#${event.id} ${event.type} ${JSON.stringify(event.payload)}`;
    root.appendChild(line);
  }
  root.scrollTop = root.scrollHeight;
}

export function renderBanner(root: HTMLElement, text: string): void {
  root.textContent = text;
  root.style.display = text ? "block" : "none";
}
