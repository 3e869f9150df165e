/** Server-sent event consumption with resumable, idempotent delivery.
 *
 * The stream format is the standard one: blank-line separated blocks of
 * "id: N", "event: type", "data: {json}" lines.  Delivery guarantees:
 * events reach the handler in id order, an id at or below the last
 * delivered one is dropped, and reconnects resume from the last id via
 * the ?after= query parameter, so a dropped connection never duplicates
 * a chat turn.
 */

import type { StreamEvent } from "./types.js";

export interface SseParseState {
  buffer: string;
}

/** Consume a chunk of stream text, returning completed events. */
export function feedChunk(state: SseParseState, chunk: string): StreamEvent[] {
  state.buffer += chunk;
  const events: StreamEvent[] = [];
  let cut = state.buffer.indexOf("\n\n");
  while (cut >= 0) {
    const block = state.buffer.slice(0, cut);
    state.buffer = state.buffer.slice(cut + 2);
    const parsed = parseBlock(block);
    if (parsed !== null) events.push(parsed);
    cut = state.buffer.indexOf("\n\n");
  }
  return events;
}

function parseBlock(block: string): StreamEvent | null {
  let data = "";
  for (const line of block.split("\n")) {
    if (line.startsWith("data: ")) data = line.slice("data: ".length);
  }
  if (!data) return null;
  try {
    return JSON.parse(data) as StreamEvent;
  } catch {
    return null;
  }
}

/** Drop events already seen; returns the events to apply, in order. */
export function dedupe(lastId: number, events: StreamEvent[]): StreamEvent[] {
  const fresh: StreamEvent[] = [];
  let last = lastId;
  for (const event of events) {
    if (event.id <= last) continue;
    last = event.id;
    fresh.push(event);
  }
  return fresh;
}

export interface FeedOptions {
  follow: boolean;
  signal?: AbortSignal;
  /** Called with each new event, in order, exactly once per id. */
  onEvent: (event: StreamEvent) => void;
  /** Reconnect back-off between attempts, milliseconds. */
  retryMs?: number;
}

export class EventFeed {
  lastId = -1;
  private stopped = false;

  constructor(
    private urlFor: (after: number, follow: boolean) => string,
    private options: FeedOptions,
  ) {}

  stop(): void {
    this.stopped = true;
  }

  /** Fetch the current backlog once; resolves when caught up. */
  async catchUp(): Promise<void> {
    await this.readOnce(false);
  }

  /** Follow the stream until stopped, reconnecting on drops. */
  async follow(): Promise<void> {
    while (!this.stopped && !this.options.signal?.aborted) {
      try {
        await this.readOnce(true);
      } catch {
        // connection dropped; fall through to the retry pause
      }
      if (this.stopped || this.options.signal?.aborted) return;
      await pause(this.options.retryMs ?? 500);
    }
  }

  private async readOnce(follow: boolean): Promise<void> {
    const response = await fetch(this.urlFor(this.lastId, follow), {
      signal: this.options.signal,
    });
    if (!response.ok || response.body === null) {
      throw new Error(`event stream: ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parse: SseParseState = { buffer: "" };
    try {
      while (!this.stopped) {
        const { done, value } = await reader.read();
        if (done) break;
        const batch = dedupe(this.lastId, feedChunk(parse, decoder.decode(value, { stream: true })));
        for (const event of batch) {
          this.lastId = event.id;
          this.options.onEvent(event);
        }
      }
    } finally {
      reader.cancel().catch(() => undefined);
    }
  }
}

function pause(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
