/** Wire types for the /v1 session API, mirrored field by field. */

export interface StepRow {
  index: number;
  name: string;
  input: string;
  prev_output: string;
  output: string;
  failure: number;
  node_path: string;
}

export interface EpisodeRecord {
  index: number;
  role: "task" | "feedback" | "command";
  message: string;
  prompt_hash: string;
  response: string;
  backend_id: string;
  behavior_mode: string;
  parse_error: string;
  error: string;
  behavior_failure: number;
  steps: StepRow[];
  return_contribution: number;
  latency_s: number;
  goal_met: boolean | null;
  cause: string;
}

export interface GridView {
  gripper_cell: [number, number, number];
  object_cells: Record<string, [number, number, number]>;
  obstacle_cells: [number, number, number][];
  white_area: [number, number];
}

export interface SessionState {
  session_id: string;
  status: "awaiting_task" | "executing" | "awaiting_feedback" | "closed";
  scenario: "tabletop" | "coffee" | "supervisory";
  mode: string;
  task: string | null;
  feedback: string[];
  observation_lines: string[];
  world_version: number;
  zones: Record<string, string[]>;
  stacks: string[][];
  gripper: { open: boolean; width: number; held: string | null };
  arm_zone: string;
  machine_on: boolean;
  cabinet_door_open: boolean;
  machine_cover_open: boolean;
  grid: GridView | null;
  episodes: number;
  flags: number[];
  ledger_value: number;
  task_elapsed_s: number | null;
  state_hash: string;
}

export interface TraceView {
  session_id: string;
  episodes: EpisodeRecord[];
  ledger: { beta: number; flags: number[]; value: number };
}

export interface StreamEvent {
  id: number;
  type:
    | "task_set"
    | "prompt_built"
    | "llm_response"
    | "behavior_parsed"
    | "step_executed"
    | "episode_done"
    | "perturbation";
  payload: Record<string, unknown>;
}

export interface ActionEntry {
  name: string;
  type: string;
  description: string;
  endpoint: { kind: string; target: string; timeout_s: number };
}
