/** View models for the behavior panel.
 *
 * The panel shows what the language model sent back and how it ran:
 * sequences as numbered rows with pass/fail markers, trees as an
 * indented outline with executed nodes highlighted, state machines as a
 * state list with the visited path, and unparseable replies as raw text
 * with the fenced block (when present) marked out.  Execution truth
 * comes from the recorded steps; the reply text is re-read here only to
 * draw structure, never to run anything.
 */

import type { EpisodeRecord, StepRow } from "./types.js";

export interface SequenceRowView {
  index: number;
  name: string;
  input: string;
  marker: "pass" | "fail" | "skipped";
  output: string;
}

export interface TreeLineView {
  depth: number;
  label: string;
  status: "pass" | "fail" | "idle";
  attempts: number | null;
}

export interface FsmStateView {
  id: string;
  label: string;
  visited: boolean;
  active: boolean;
  terminal: "" | "success" | "failure";
}

export type BehaviorPanelModel =
  | { kind: "empty" }
  | { kind: "sequence"; rows: SequenceRowView[]; source: string }
  | { kind: "tree"; lines: TreeLineView[]; source: string }
  | { kind: "fsm"; states: FsmStateView[]; source: string }
  | { kind: "raw"; text: string; warning: string; highlightStart: number; highlightEnd: number };

const FENCE = /```(\w+)\n([\s\S]*?)```/;

export function findFence(text: string): { tag: string; payload: string; start: number; end: number } | null {
  const match = FENCE.exec(text);
  if (!match) return null;
  return {
    tag: match[1],
    payload: match[2],
    start: match.index,
    end: match.index + match[0].length,
  };
}

export function behaviorPanelModel(episode: EpisodeRecord | null): BehaviorPanelModel {
  if (episode === null) return { kind: "empty" };
  if (episode.parse_error || (!episode.behavior_mode && episode.response)) {
    const fence = findFence(episode.response);
    return {
      kind: "raw",
      text: episode.response,
      warning: episode.parse_error || episode.error || "no behavior in this reply",
      highlightStart: fence ? fence.start : 0,
      highlightEnd: fence ? fence.end : episode.response.length,
    };
  }
  if (!episode.behavior_mode) return { kind: "empty" };
  const fence = findFence(episode.response);
  const source = fence ? fence.payload : "";
  if (episode.behavior_mode === "tree") {
    return { kind: "tree", lines: treeOutline(source, episode.steps), source };
  }
  if (episode.behavior_mode === "fsm") {
    return { kind: "fsm", states: fsmStates(source, episode.steps), source };
  }
  return { kind: "sequence", rows: sequenceRows(episode, source), source };
}

// -- sequence ----------------------------------------------------------------

function sequenceRows(episode: EpisodeRecord, source: string): SequenceRowView[] {
  if (episode.steps.length > 0) {
    return episode.steps.map((step) => ({
      index: step.index,
      name: step.name,
      input: step.input,
      marker: step.failure === 1 ? "fail" : "pass",
      output: step.output,
    }));
  }
  // Nothing ran (for example unknown action names); show the plan as sent.
  const planned = plannedSteps(source);
  return planned.map((p, i) => ({
    index: i,
    name: p.name,
    input: p.input,
    marker: "skipped",
    output: "",
  }));
}

function plannedSteps(source: string): { name: string; input: string }[] {
  try {
    const doc = JSON.parse(source) as { actions?: { name?: string; input?: string }[] };
    if (Array.isArray(doc.actions)) {
      return doc.actions.map((a) => ({ name: String(a.name ?? "?"), input: String(a.input ?? "") }));
    }
  } catch {
    // scripts and broken payloads fall through to a line scan
  }
  const rows: { name: string; input: string }[] = [];
  for (const line of source.split("\n")) {
    const call = /^([a-z0-9_]+)\(\s*(?:"([^"]*)")?\s*\)/.exec(line.trim());
    if (call) rows.push({ name: call[1], input: call[2] ?? "" });
  }
  return rows;
}

// -- tree --------------------------------------------------------------------

interface TagToken {
  name: string;
  attrs: Record<string, string>;
  closing: boolean;
  selfClosing: boolean;
}

const TAG = /<(\/?)([A-Za-z]+)((?:\s+[a-z]+="[^"]*")*)\s*(\/?)>/g;
const ATTR = /([a-z]+)="([^"]*)"/g;

function scanTags(xml: string): TagToken[] {
  const tokens: TagToken[] = [];
  TAG.lastIndex = 0;
  let match = TAG.exec(xml);
  while (match !== null) {
    const attrs: Record<string, string> = {};
    ATTR.lastIndex = 0;
    let attr = ATTR.exec(match[3]);
    while (attr !== null) {
      attrs[attr[1]] = attr[2];
      attr = ATTR.exec(match[3]);
    }
    tokens.push({
      name: match[2],
      attrs,
      closing: match[1] === "/",
      selfClosing: match[4] === "/",
    });
    match = TAG.exec(xml);
  }
  return tokens;
}

function nodeLabel(token: TagToken): string {
  if (token.name === "Action" || token.name === "Condition") {
    const input = token.attrs.input ? ` "${token.attrs.input}"` : "";
    return `${token.name} ${token.attrs.name ?? "?"}${input}`;
  }
  if (token.name === "Retry") return `Retry(${token.attrs.num ?? "?"})`;
  if (token.name === "Parallel") return `Parallel(threshold=${token.attrs.threshold ?? "?"})`;
  return token.name;
}

/**
 * Indented outline of the tree, one line per node, with executed leaves
 * marked from the step records.  Node paths are child-index paths, the
 * same addressing the executor reports ("0/1/0" is root's child 0's
 * child 1's child 0).
 */
export function treeOutline(xml: string, steps: StepRow[]): TreeLineView[] {
  const executed = new Map<string, StepRow[]>();
  for (const step of steps) {
    const at = executed.get(step.node_path) ?? [];
    at.push(step);
    executed.set(step.node_path, at);
  }
  const lines: TreeLineView[] = [];
  const childIndex: number[] = [0];
  const pathStack: string[] = [];
  for (const token of scanTags(xml)) {
    if (token.name === "BehaviorTree") continue;
    const leafName = token.name === "Action" || token.name === "Condition";
    if (token.closing) {
      // only composites and decorators were pushed on open
      if (!leafName) {
        pathStack.pop();
        childIndex.pop();
      }
      continue;
    }
    const segment = String(childIndex[childIndex.length - 1]);
    const path = [...pathStack, segment].join("/");
    childIndex[childIndex.length - 1] += 1;
    const depth = pathStack.length;
    const isLeaf = leafName;
    let status: TreeLineView["status"] = "idle";
    let attempts: number | null = null;
    if (isLeaf) {
      const runs = executed.get(path) ?? [];
      if (runs.length > 0) {
        status = runs[runs.length - 1].failure === 1 ? "fail" : "pass";
        attempts = runs.length > 1 ? runs.length : null;
      }
    } else {
      const under = steps.filter((s) => s.node_path.startsWith(path + "/"));
      if (under.length > 0) status = under.some((s) => s.failure === 1) ? "fail" : "pass";
      if (token.name === "Retry") {
        const first = under.length
          ? Math.max(...under.map((s) => countRuns(steps, s.node_path)))
          : 0;
        attempts = first || null;
      }
    }
    lines.push({ depth, label: nodeLabel(token), status, attempts });
    if (!token.selfClosing && !isLeaf) {
      pathStack.push(segment);
      childIndex.push(0);
    }
  }
  return lines;
}

function countRuns(steps: StepRow[], nodePath: string): number {
  return steps.filter((s) => s.node_path === nodePath).length;
}

// -- state machine -----------------------------------------------------------

interface FsmDoc {
  fsm?: {
    initial?: string;
    states?: Record<string, { action?: string; input?: string; on_success?: string; on_failure?: string }>;
    terminals?: Record<string, string>;
  };
}

export function fsmStates(source: string, steps: StepRow[]): FsmStateView[] {
  let doc: FsmDoc;
  try {
    doc = JSON.parse(source) as FsmDoc;
  } catch {
    return [];
  }
  const fsm = doc.fsm ?? {};
  const states = fsm.states ?? {};
  const terminals = fsm.terminals ?? {};
  const visited = new Set(steps.map((s) => s.node_path));
  const active = steps.length ? steps[steps.length - 1].node_path : "";
  const views: FsmStateView[] = [];
  for (const [id, def] of Object.entries(states)) {
    const input = def.input ? ` "${def.input}"` : "";
    views.push({
      id,
      label: `${id}: ${def.action ?? "?"}${input}  (ok → ${def.on_success ?? "?"}, fail → ${def.on_failure ?? "?"})`,
      visited: visited.has(id),
      active: id === active,
      terminal: "",
    });
  }
  for (const [id, verdict] of Object.entries(terminals)) {
    views.push({
      id,
      label: `${id} [terminal: ${verdict}]`,
      visited: false,
      active: false,
      terminal: verdict === "success" ? "success" : "failure",
    });
  }
  return views;
}
