import { describe, expect, it } from "vitest";

import { dedupe, feedChunk, type SseParseState } from "../src/sse.js";
import type { StreamEvent } from "../src/types.js";

function block(id: number, type: string, payload: object): string {
  return `id: ${id}\nevent: ${type}\ndata: ${JSON.stringify({ id, type, payload })}\n\n`;
}

describe("stream parsing", () => {
  it("parses a complete block into an event", () => {
    const state: SseParseState = { buffer: "" };
    const events = feedChunk(state, block(0, "task_set", { task: "x" }));
    expect(events).toHaveLength(1);
    expect(events[0].id).toBe(0);
    expect(events[0].type).toBe("task_set");
    expect(events[0].payload).toEqual({ task: "x" });
  });

  it("holds partial blocks across chunk boundaries", () => {
    const state: SseParseState = { buffer: "" };
    const whole = block(3, "episode_done", { ledger_value: -2 });
    const first = feedChunk(state, whole.slice(0, 25));
    expect(first).toHaveLength(0);
    const second = feedChunk(state, whole.slice(25));
    expect(second).toHaveLength(1);
    expect(second[0].payload).toEqual({ ledger_value: -2 });
  });

  it("parses several blocks from one chunk in order", () => {
    const state: SseParseState = { buffer: "" };
    const text = block(0, "task_set", {}) + block(1, "prompt_built", {}) + block(2, "llm_response", {});
    const events = feedChunk(state, text);
    expect(events.map((e) => e.id)).toEqual([0, 1, 2]);
  });

  it("ignores blocks without a data line", () => {
    const state: SseParseState = { buffer: "" };
    const events = feedChunk(state, ": keepalive\n\n" + block(5, "task_set", {}));
    expect(events.map((e) => e.id)).toEqual([5]);
  });
});

describe("resume and idempotency", () => {
  const make = (id: number): StreamEvent => ({ id, type: "step_executed", payload: {} });

  it("drops events at or below the last applied id", () => {
    const events = [make(0), make(1), make(2), make(3)];
    expect(dedupe(1, events).map((e) => e.id)).toEqual([2, 3]);
  });

  it("passes everything through on a fresh connection", () => {
    const events = [make(0), make(1)];
    expect(dedupe(-1, events)).toHaveLength(2);
  });

  it("replaying an overlapping batch adds nothing new", () => {
    const events = [make(0), make(1), make(2)];
    const applied = dedupe(-1, events);
    const replay = dedupe(applied[applied.length - 1].id, events);
    expect(replay).toHaveLength(0);
  });

  it("drops duplicated ids inside one batch", () => {
    const events = [make(4), make(4), make(5)];
    expect(dedupe(3, events).map((e) => e.id)).toEqual([4, 5]);
  });
});
