/** Pure view models for the session page.
 *
 * Truth lives on the server: every model here is a straight projection
 * of GET /state and GET /trace responses, so rebuilding after a page
 * refresh reproduces the identical view.  The event stream only decides
 * when to refresh and animates steps while an episode runs; it never
 * feeds a client-side copy of the world.
 */

import type { EpisodeRecord, SessionState, TraceView } from "./types.js";

export interface ChatTurn {
  role: "human" | "system";
  episodeIndex: number;
  text: string;
  badge: Badge | null;
  detail: string;
}

export interface Badge {
  kind: "success" | "failed";
  text: string;
}

export function badgeFor(episode: EpisodeRecord): Badge {
  const delta = episode.return_contribution.toFixed(2);
  if (episode.behavior_failure === 0) {
    return { kind: "success", text: `success  ${delta}` };
  }
  return { kind: "failed", text: `failed  ${delta}` };
}

function systemSummary(episode: EpisodeRecord): string {
  if (episode.error) return episode.error;
  if (episode.parse_error) return `response did not parse: ${episode.parse_error}`;
  const n = episode.steps.length;
  const failed = episode.steps.filter((s) => s.failure === 1).length;
  const head = `${episode.behavior_mode || "?"} behavior, ${n} step${n === 1 ? "" : "s"}`;
  return failed ? `${head}, ${failed} failed` : head;
}

/** Chat transcript: one human turn and one system turn per episode. */
export function transcriptModel(trace: TraceView): ChatTurn[] {
  const turns: ChatTurn[] = [];
  for (const episode of trace.episodes) {
    turns.push({
      role: "human",
      episodeIndex: episode.index,
      text: episode.message,
      badge: null,
      detail: episode.role,
    });
    turns.push({
      role: "system",
      episodeIndex: episode.index,
      text: systemSummary(episode),
      badge: badgeFor(episode),
      detail: episode.goal_met ? "goal satisfied" : "",
    });
  }
  return turns;
}

export interface ComposerModel {
  enabled: boolean;
  label: string;
  placeholder: string;
}

/**
 * Turn-taking gate: exactly one human input per executed behavior.  The
 * first message names the task, later ones are corrective feedback, and
 * in the supervisory scenario every message is the next command.
 */
export function composerModel(
  status: SessionState["status"],
  scenario: SessionState["scenario"],
): ComposerModel {
  switch (status) {
    case "awaiting_task":
      return {
        enabled: true,
        label: "Describe the task",
        placeholder: "e.g. put the red cube in the sink",
      };
    case "executing":
      return { enabled: false, label: "Executing...", placeholder: "" };
    case "closed":
      return { enabled: false, label: "Session closed", placeholder: "" };
    case "awaiting_feedback":
      if (scenario === "supervisory") {
        return {
          enabled: true,
          label: "Next command",
          placeholder: "e.g. go left twice, then close the gripper",
        };
      }
      return {
        enabled: true,
        label: "Corrective feedback",
        placeholder: "tell the robot what went wrong",
      };
  }
}

/** Send is gated on both the composer state and a non-empty draft. */
export function sendEnabled(composer: ComposerModel, draft: string): boolean {
  return composer.enabled && draft.trim().length > 0;
}

export interface LedgerModel {
  value: string;
  flags: string;
  beta: string;
  elapsed: string;
}

export function ledgerModel(state: SessionState, beta: number): LedgerModel {
  return {
    value: state.ledger_value.toFixed(2),
    flags: state.flags.length ? state.flags.join(" ") : "(no episodes yet)",
    beta: beta.toFixed(2),
    elapsed:
      state.task_elapsed_s === null ? "running" : `${state.task_elapsed_s.toFixed(2)} s`,
  };
}

export function latencyReadout(episode: EpisodeRecord): string {
  return `${episode.latency_s.toFixed(2)} s round trip`;
}
