/** Wires one live session to the page.
 *
 * Connecting fetches the current state and trace, paints every panel,
 * and subscribes to the event stream.  Each event type updates exactly
 * one panel, in id order; episode boundaries and perturbations trigger
 * a re-fetch of the GET endpoints so the page never drifts from what
 * the service would report to a fresh client.
 */

import { ApiClient, ApiError } from "./api.js";
import { behaviorPanelModel } from "./behavior.js";
import { byId, el } from "./dom.js";
import {
  markUndelivered,
  renderBanner,
  renderBehavior,
  renderComposer,
  renderEventLog,
  renderGrid,
  renderLatency,
  renderLedger,
  renderObservation,
  renderPendingTurn,
  renderTranscript,
  renderZoneMap,
} from "./panels.js";
import { EventFeed } from "./sse.js";
import {
  composerModel,
  latencyReadout,
  ledgerModel,
  transcriptModel,
} from "./transcript.js";
import type { SessionState, StreamEvent, TraceView } from "./types.js";
import { gridModel, gripperCaption, zoneMapModel } from "./zonemap.js";

export class SessionController {
  state: SessionState | null = null;
  trace: TraceView | null = null;
  events: StreamEvent[] = [];
  draft = "";
  private feed: EventFeed | null = null;
  private followTask: Promise<void> | null = null;
  private abort: AbortController | null = null;
  private busy = false;
  private liveSteps: HTMLElement | null = null;

  constructor(
    public api: ApiClient,
    public sessionId: string,
    private root: HTMLElement,
  ) {}

  // -- lifecycle -------------------------------------------------------------

  async connect(follow = true): Promise<void> {
    try {
      await this.refresh();
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        renderBanner(byId(this.root, "banner"), `unknown session: ${this.sessionId}`);
        return;
      }
      throw error;
    }
    renderBanner(byId(this.root, "banner"), "");
    this.startFeed(-1, follow);
    await this.feed?.catchUp();
    if (follow) this.followTask = this.feed?.follow() ?? null;
  }

  private startFeed(lastId: number, follow: boolean): void {
    this.abort = new AbortController();
    this.feed = new EventFeed(
      (after, f) => this.api.eventsUrl(this.sessionId, after, f),
      {
        follow,
        onEvent: (event) => this.applyEvent(event),
        retryMs: 300,
        signal: this.abort.signal,
      },
    );
    this.feed.lastId = lastId;
  }

  /** Resume after a dropped stream; keeps the last event id, so nothing
   * already applied is applied twice. */
  async reconnect(): Promise<void> {
    const lastId = this.feed?.lastId ?? -1;
    this.stop();
    await this.refresh();
    this.startFeed(lastId, true);
    await this.feed?.catchUp();
    this.followTask = this.feed?.follow() ?? null;
  }

  stop(): void {
    this.feed?.stop();
    this.abort?.abort();
    this.feed = null;
    this.abort = null;
  }

  async settled(): Promise<void> {
    await this.followTask?.catch(() => undefined);
  }

  // -- server truth ----------------------------------------------------------

  async refresh(): Promise<void> {
    const [state, trace] = await Promise.all([
      this.api.state(this.sessionId),
      this.api.trace(this.sessionId),
    ]);
    this.state = state;
    this.trace = trace;
    this.renderAll();
  }

  private renderAll(): void {
    const state = this.state;
    const trace = this.trace;
    if (!state || !trace) return;
    byId(this.root, "session-label").textContent = `${state.session_id} (${state.scenario}, ${state.mode})`;
    byId(this.root, "status-chip").textContent = state.status;
    renderTranscript(byId(this.root, "transcript"), transcriptModel(trace));
    this.renderComposerNow();
    renderObservation(byId(this.root, "observation"), state.observation_lines);
    this.renderWorkspace();
    const last = trace.episodes.length ? trace.episodes[trace.episodes.length - 1] : null;
    renderBehavior(byId(this.root, "behavior"), behaviorPanelModel(last));
    this.liveSteps = null;
    renderLedger(byId(this.root, "ledger"), ledgerModel(state, trace.ledger.beta));
    if (state.scenario === "supervisory") {
      renderLatency(
        byId(this.root, "latency-readout"),
        last ? latencyReadout(last) : "no commands yet",
      );
    }
    renderEventLog(byId(this.root, "event-log"), this.events);
  }

  private renderWorkspace(): void {
    const state = this.state;
    if (!state) return;
    const workspace = byId(this.root, "workspace");
    if (state.scenario === "supervisory" && state.grid) {
      renderGrid(workspace, gridModel(state.grid));
      byId(this.root, "supervisory-extras").style.display = "block";
    } else {
      renderZoneMap(workspace, zoneMapModel(state), gripperCaption(state));
      byId(this.root, "supervisory-extras").style.display = "none";
    }
  }

  private renderComposerNow(): void {
    const state = this.state;
    if (!state) return;
    const status = this.busy ? "executing" : state.status;
    renderComposer(byId(this.root, "composer"), composerModel(status, state.scenario), this.draft);
  }

  // -- composer --------------------------------------------------------------

  setDraft(text: string): void {
    this.draft = text;
    this.renderComposerNow();
  }

  async send(): Promise<void> {
    const text = this.draft.trim();
    if (!text || this.busy || !this.state) return;
    const transcript = byId(this.root, "transcript");
    renderPendingTurn(transcript, text);
    this.busy = true;
    this.draft = "";
    const input = this.root.querySelector(".composer-input") as HTMLTextAreaElement;
    input.value = "";
    this.renderComposerNow();
    try {
      await this.api.sendMessage(this.sessionId, text);
    } catch (error) {
      const detail = error instanceof ApiError ? `${error.kind}: ${error.message}` : String(error);
      markUndelivered(transcript, detail);
      renderBanner(byId(this.root, "banner"), detail);
      this.busy = false;
      this.renderComposerNow();
      return;
    }
    this.busy = false;
    await this.drainEvents();
    await this.refresh();
  }

  /** Pull any events the follow loop has not polled yet, so the log and
   * live panels are current the moment the POST resolves. */
  private async drainEvents(): Promise<void> {
    await this.feed?.catchUp();
  }

  // -- world commands --------------------------------------------------------

  async perturb(objectId: string, zone: string, atStep: number | null): Promise<void> {
    await this.api.perturb(this.sessionId, {
      object_id: objectId,
      new_zone: zone || null,
      at_step: atStep,
    });
    await this.drainEvents();
    await this.refresh();
  }

  async resetWorld(): Promise<void> {
    await this.api.resetWorld(this.sessionId);
    await this.refresh();
  }

  // -- event application -----------------------------------------------------

  applyEvent(event: StreamEvent): void {
    this.events.push(event);
    switch (event.type) {
      case "task_set":
      case "prompt_built":
      case "llm_response":
        this.renderPipeline(event);
        break;
      case "behavior_parsed":
        this.startLivePanel(String(event.payload.mode ?? "?"));
        break;
      case "step_executed":
        this.appendLiveStep(event);
        break;
      case "episode_done":
        this.renderLedgerFromEvent(event);
        break;
      case "perturbation":
        this.notePerturbation(event);
        break;
    }
    renderEventLog(byId(this.root, "event-log"), this.events);
  }

  private renderPipeline(event: StreamEvent): void {
    const strip = byId(this.root, "pipeline");
    const chip = el("span", `chip chip-${event.type}`);
    if (event.type === "task_set") chip.textContent = "task set";
    else if (event.type === "prompt_built") {
      chip.textContent = `prompt ${String(event.payload.prompt_hash ?? "").slice(0, 8)}`;
    } else {
      chip.textContent = `reply ${String(event.payload.chars ?? "?")} chars`;
    }
    strip.appendChild(chip);
    while (strip.childNodes.length > 6) strip.removeChild(strip.firstChild as Node);
  }

  private startLivePanel(mode: string): void {
    const behavior = byId(this.root, "behavior");
    behavior.textContent = "";
    const head = el("div", "panel-hint", `running ${mode} behavior`);
    behavior.appendChild(head);
    this.liveSteps = el("div", "behavior-live");
    behavior.appendChild(this.liveSteps);
  }

  private appendLiveStep(event: StreamEvent): void {
    if (!this.liveSteps) this.startLivePanel("?");
    const failure = Number(event.payload.failure ?? 0);
    const row = el("div", `behavior-row step-${failure ? "fail" : "pass"}`);
    row.dataset.step = String(event.payload.index ?? "");
    const mark = failure ? "✗" : "✓";
    row.textContent = `${mark} ${String(event.payload.name ?? "?")} ${String(event.payload.input ?? "")}`;
    this.liveSteps?.appendChild(row);
  }

  private renderLedgerFromEvent(event: StreamEvent): void {
    const valueNode = this.root.querySelector("#ledger-value");
    if (valueNode) valueNode.textContent = Number(event.payload.ledger_value ?? 0).toFixed(2);
    if (event.payload.goal_met === true) {
      const timer = this.root.querySelector("#task-timer") as HTMLElement | null;
      if (timer) timer.dataset.running = "false";
    }
  }

  private notePerturbation(event: StreamEvent): void {
    const workspace = byId(this.root, "workspace");
    const note = el(
      "div",
      "perturb-note",
      `scene change: ${String(event.payload.object_id)} → ${String(
        event.payload.new_zone ?? event.payload.new_cell ?? "?",
      )}${event.payload.at_step === null ? "" : ` before step ${String(event.payload.at_step)}`}`,
    );
    workspace.appendChild(note);
  }
}
