"""Chat sessions: message in, episode out.

The first message of a session sets the task; every later message is
corrective feedback (supervisory sessions treat every message as a new
command).  Each message runs the full pipeline: observe, build prompt,
query the gateway, extract and validate the behavior, execute it with
any queued perturbations, then append the behavior failure flag to the
return ledger.  A reply that cannot be parsed or names unknown actions
is a failed episode that leaves the world untouched.

Every session appends to its own JSONL log; replaying the log through a
fresh service reconstructs the identical session state, which is what
makes crash recovery and transcript-driven tests possible.
"""
from __future__ import annotations

import hashlib
import json
import random
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .actions import ActionLibrary, builtin_library, render_library_description, \
    validate_behavior_names
from .clocks import SimClock, WallClock
from .engine import ActionRouter, ExecutionTrace, StepResult, compute_return, run_behavior
from .errors import (
    BadConfig,
    EmptyMessage,
    GatewayTimeout,
    NoTranscriptEntry,
    ParseError,
    RobochatError,
    SessionClosed,
    TransportError,
    UnknownSession,
)
from .gateway import GatewayConfig, ReplayBackend, build_gateway, prompt_hash
from .dmp import SkillStore
from .observe import default_observers, collect_observation
from .parsing import MODES, parse_response
from .prompts import PromptTemplate, build_prompt, load_template
from .tasks import TaskSpec
from .world import (
    PerturbationEvent,
    WorldState,
    apply_perturbation,
    goal_satisfied,
    ground_truth_plan,
    reset,
)

EVENT_TYPES = ("task_set", "prompt_built", "llm_response", "behavior_parsed",
               "step_executed", "episode_done", "perturbation")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str                 # tabletop | coffee | supervisory
    n_boxes: int = 0
    seed: int = 0
    occlusion: bool = False

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_boxes": self.n_boxes, "seed": self.seed,
                "occlusion": self.occlusion}

    @staticmethod
    def from_dict(d: dict) -> "ScenarioConfig":
        return ScenarioConfig(kind=d["kind"], n_boxes=d.get("n_boxes", 0),
                              seed=d.get("seed", 0), occlusion=d.get("occlusion", False))


@dataclass(frozen=True)
class SessionConfig:
    scenario: ScenarioConfig
    gateway: GatewayConfig
    mode: str = "sequence"
    beta: float = 1.0
    task_spec: TaskSpec | None = None
    carryover_feedback: tuple[str, ...] = ()
    latency_mean_s: float = 0.0
    latency_jitter_s: float = 0.0
    latency_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise BadConfig(f"unknown mode {self.mode!r}")
        if not 0 < self.beta <= 1:
            raise BadConfig(f"beta must be in (0, 1], got {self.beta!r}")
        if self.scenario.kind not in ("tabletop", "coffee", "supervisory"):
            raise BadConfig(f"unknown scenario {self.scenario.kind!r}")
        if self.latency_mean_s < 0 or self.latency_jitter_s < 0:
            raise BadConfig("latency settings must be non-negative")
        if self.latency_jitter_s > self.latency_mean_s and self.latency_mean_s > 0:
            raise BadConfig("jitter larger than the mean would allow negative delays")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "gateway": self.gateway.to_dict(),
            "mode": self.mode,
            "beta": self.beta,
            "task_spec": self.task_spec.to_dict() if self.task_spec else None,
            "carryover_feedback": list(self.carryover_feedback),
            "latency_mean_s": self.latency_mean_s,
            "latency_jitter_s": self.latency_jitter_s,
            "latency_seed": self.latency_seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "SessionConfig":
        return SessionConfig(
            scenario=ScenarioConfig.from_dict(d["scenario"]),
            gateway=GatewayConfig.from_dict(d["gateway"]),
            mode=d.get("mode", "sequence"),
            beta=d.get("beta", 1.0),
            task_spec=TaskSpec.from_dict(d["task_spec"]) if d.get("task_spec") else None,
            carryover_feedback=tuple(d.get("carryover_feedback", ())),
            latency_mean_s=d.get("latency_mean_s", 0.0),
            latency_jitter_s=d.get("latency_jitter_s", 0.0),
            latency_seed=d.get("latency_seed", 0),
        )


@dataclass(frozen=True)
class Event:
    id: int
    type: str
    payload: dict

    def to_dict(self) -> dict:
        return {"id": self.id, "type": self.type, "payload": self.payload}


@dataclass
class EpisodeRecord:
    index: int
    role: str                      # task | feedback | command
    message: str
    prompt_hash: str = ""
    response_text: str = ""
    backend_id: str = ""
    behavior_mode: str = ""
    parse_error: str = ""
    error: str = ""
    behavior_failure: int = 1
    steps: list[StepResult] = field(default_factory=list)
    return_contribution: float = 0.0
    latency_s: float = 0.0
    goal_met: bool | None = None
    cause: str = ""                # filled in by the bench feedback policy

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "role": self.role,
            "message": self.message,
            "prompt_hash": self.prompt_hash,
            "response": self.response_text,
            "backend_id": self.backend_id,
            "behavior_mode": self.behavior_mode,
            "parse_error": self.parse_error,
            "error": self.error,
            "behavior_failure": self.behavior_failure,
            "steps": [
                {
                    "index": s.index, "name": s.name, "input": s.input,
                    "prev_output": s.prev_output, "output": s.output,
                    "failure": s.failure, "node_path": s.node_path,
                }
                for s in self.steps
            ],
            "return_contribution": self.return_contribution,
            "latency_s": self.latency_s,
            "goal_met": self.goal_met,
            "cause": self.cause,
        }


class Session:
    def __init__(self, session_id: str, config: SessionConfig, world: WorldState,
                 gateway, library: ActionLibrary, router: ActionRouter,
                 template: PromptTemplate, clock):
        self.id = session_id
        self.config = config
        self.world = world
        self.gateway = gateway
        self.library = library
        self.router = router
        self.template = template
        self.clock = clock
        self.observers = default_observers(config.scenario.kind)
        self.task: str | None = None
        self.feedback: list[str] = list(config.carryover_feedback)
        self.flags: list[int] = []
        self.episodes: list[EpisodeRecord] = []
        self.events: list[Event] = []
        self.pending: list[PerturbationEvent] = []
        self.status = "awaiting_task"
        self.lock = threading.RLock()
        self.latency_rng = random.Random(config.latency_seed)
        self.task_started_at: float | None = None
        self.task_elapsed_s: float | None = None
        self._store_path: Path | None = None
        self._replaying = False

    # -- bookkeeping ---------------------------------------------------------

    def emit(self, type_: str, payload: dict) -> None:
        self.events.append(Event(id=len(self.events), type=type_, payload=payload))

    def ledger_value(self) -> float:
        return compute_return(self.flags, self.config.beta)

    def persist(self, record: dict) -> None:
        if self._store_path is None or self._replaying:
            return
        with self._store_path.open("a") as fh:
            fh.write(json.dumps(record) + "\n")

    def state_hash(self) -> str:
        snapshot = {
            "world": self.world.to_dict(),
            "task": self.task,
            "feedback": self.feedback,
            "flags": self.flags,
            "ledger": self.ledger_value(),
            "episodes": len(self.episodes),
        }
        blob = json.dumps(snapshot, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


class SessionService:
    """Owns sessions, their logs, and the shared action registry."""

    def __init__(self, store_dir: str | Path | None = None, clock=None,
                 template: PromptTemplate | None = None,
                 library: ActionLibrary | None = None,
                 skills: SkillStore | None = None):
        self.store_dir = Path(store_dir) if store_dir else None
        if self.store_dir:
            self.store_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock or WallClock()
        self.template = template or load_template()
        self.library = library or builtin_library()
        self.skills = skills or SkillStore()
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- lifecycle -----------------------------------------------------------

    def create_session(self, config: SessionConfig, session_id: str | None = None,
                       gateway=None, _log_creation: bool = True) -> Session:
        sid = session_id or uuid.uuid4().hex[:12]
        world = reset(config.scenario.kind, n_boxes=config.scenario.n_boxes,
                      seed=config.scenario.seed, occlusion=config.scenario.occlusion)
        router = ActionRouter(self.library, skill_store=self.skills)
        session = Session(sid, config, world, gateway, self.library, router,
                          self.template, self.clock)
        if gateway is None:
            session.gateway = self._build_gateway(session)
        if self.store_dir:
            session._store_path = self.store_dir / f"{sid}.jsonl"
        with self._lock:
            self.sessions[sid] = session
        if _log_creation:
            session.persist({"type": "session", "id": sid, "config": config.to_dict()})
        return session

    def _build_gateway(self, session: Session):
        cfg = session.config.gateway
        if cfg.backend in ("oracle", "corrupting"):
            if session.config.scenario.kind != "coffee" and session.config.task_spec is None:
                raise BadConfig(f"{cfg.backend} backend needs a task_spec here")
            return build_gateway(cfg, planner=self._planner_for(session))
        return build_gateway(cfg, clock=self.clock)

    def _planner_for(self, session: Session):
        def planner(feedback: list[str]):
            return ground_truth_plan(session.world, session.config.task_spec,
                                     guarded=bool(feedback))
        return planner

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def close_session(self, session_id: str) -> None:
        self.get(session_id).status = "closed"

    # -- the pipeline --------------------------------------------------------

    def submit_message(self, session_id: str, text: str) -> EpisodeRecord:
        session = self.get(session_id)
        with session.lock:
            return self._run_episode(session, text)

    def supervisory_step(self, session_id: str, command: str) -> EpisodeRecord:
        """Same pipeline; named separately because every message is a command."""
        return self.submit_message(session_id, command)

    def _run_episode(self, session: Session, text: str) -> EpisodeRecord:
        if session.status == "closed":
            raise SessionClosed(session.id)
        if not text or not text.strip():
            raise EmptyMessage("empty message")
        text = text.strip()
        supervisory = session.config.scenario.kind == "supervisory"
        if session.task is None:
            session.task = text
            role = "task"
            session.emit("task_set", {"task": text})
            if session.task_started_at is None:
                session.task_started_at = session.clock.monotonic()
        elif supervisory:
            session.task = text
            role = "command"
        else:
            session.feedback.append(text)
            role = "feedback"
        record = EpisodeRecord(index=len(session.episodes), role=role, message=text)
        session.status = "executing"

        record.latency_s = self._inject_latency(session)
        prompt = build_prompt(
            session.template,
            render_library_description(session.library),
            collect_observation(session.world, session.observers),
            session.task,
            session.feedback,
            session.config.mode,
        )
        record.prompt_hash = prompt_hash(prompt)
        session.emit("prompt_built", {"prompt_hash": record.prompt_hash,
                                      "world_version": prompt.world_version})
        try:
            response = session.gateway.complete(prompt)
        except (GatewayTimeout, TransportError, NoTranscriptEntry) as exc:
            record.error = f"gateway: {exc}"
            return self._finish_episode(session, record)
        record.response_text = response.text
        record.backend_id = response.backend_id
        session.emit("llm_response", {"backend_id": response.backend_id,
                                      "chars": len(response.text),
                                      "latency_ms": response.latency_ms})
        try:
            behavior = parse_response(response.text)
        except ParseError as exc:
            record.parse_error = f"{type(exc).__name__}: {exc}"
            return self._finish_episode(session, record)
        record.behavior_mode = behavior.mode
        session.emit("behavior_parsed", {"mode": behavior.mode,
                                         "actions": len(behavior.action_names())})
        unknown = validate_behavior_names(behavior, session.library)
        if unknown:
            record.error = f"unknown actions: {unknown}"
            return self._finish_episode(session, record)

        interrupts = session.pending
        session.pending = []
        trace = run_behavior(behavior, session.world, session.router, interrupts)
        session.world = trace.final_state
        for step in trace.steps:
            session.emit("step_executed", {
                "index": step.index, "name": step.name, "input": step.input,
                "output": step.output, "failure": step.failure,
                "node_path": step.node_path,
            })
        record.steps = list(trace.steps)
        record.behavior_failure = trace.behavior_failure
        if trace.error:
            record.error = trace.error
        return self._finish_episode(session, record)

    def _inject_latency(self, session: Session) -> float:
        mean = session.config.latency_mean_s
        if mean <= 0:
            return 0.0
        jitter = session.config.latency_jitter_s
        delay = mean + session.latency_rng.uniform(-jitter, jitter)
        session.clock.sleep(delay)
        return delay

    def _finish_episode(self, session: Session, record: EpisodeRecord) -> EpisodeRecord:
        tau = record.index
        session.flags.append(record.behavior_failure)
        record.return_contribution = (
            -(session.config.beta ** tau) * (1 + record.behavior_failure))
        task_spec = session.config.task_spec
        if task_spec is not None:
            record.goal_met = goal_satisfied(session.world, task_spec)
            if record.goal_met and session.task_elapsed_s is None \
                    and session.task_started_at is not None:
                session.task_elapsed_s = (
                    session.clock.monotonic() - session.task_started_at)
        session.episodes.append(record)
        session.status = "awaiting_feedback"
        session.persist({"type": "episode", **record.to_dict()})
        session.emit("episode_done", {
            "index": record.index,
            "behavior_failure": record.behavior_failure,
            "return_contribution": record.return_contribution,
            "ledger_value": session.ledger_value(),
            "goal_met": record.goal_met,
        })
        return record

    # -- world manipulation --------------------------------------------------

    def inject_perturbation(self, session_id: str, object_id: str,
                            at_step: int | None = None,
                            new_zone: str | None = None,
                            new_cell: tuple[int, int, int] | None = None) -> None:
        """Queue a scene change for the next run, or apply it now when idle."""
        session = self.get(session_id)
        with session.lock:
            event = PerturbationEvent(at_step=-1 if at_step is None else at_step,
                                      object_id=object_id, new_zone=new_zone,
                                      new_cell=new_cell)
            if at_step is None:
                session.world = apply_perturbation(session.world, event)
            else:
                session.pending.append(event)
            session.persist({"type": "perturbation", "at_step": at_step,
                             "object_id": object_id, "new_zone": new_zone,
                             "new_cell": list(new_cell) if new_cell else None})
            session.emit("perturbation", {"object_id": object_id,
                                          "at_step": at_step,
                                          "new_zone": new_zone,
                                          "new_cell": list(new_cell) if new_cell else None})

    def reset_world(self, session_id: str) -> None:
        """Fresh scene, same session history; feedback and ledger stay."""
        session = self.get(session_id)
        with session.lock:
            sc = session.config.scenario
            session.world = reset(sc.kind, n_boxes=sc.n_boxes, seed=sc.seed,
                                  occlusion=sc.occlusion)
            session.pending = []
            session.persist({"type": "reset_world"})

    # -- views ---------------------------------------------------------------

    def get_state(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            world = session.world
            obs = collect_observation(world, session.observers)
            zones: dict[str, list[str]] = {}
            stacks: list[list[str]] = []
            from .world import ZONES, display_name, effective_zone
            for zone in ZONES:
                zones[zone] = [
                    display_name(o) for o in world.objects.values()
                    if o.location.kind == "zone" and o.location.ref == zone
                ]
            for obj in world.objects.values():
                if obj.location.kind == "on":
                    stacks.append([display_name(world.objects[obj.location.ref]),
                                   display_name(obj)])
            return {
                "session_id": session.id,
                "status": session.status,
                "scenario": session.config.scenario.kind,
                "mode": session.config.mode,
                "task": session.task,
                "feedback": list(session.feedback),
                "observation_lines": list(obs.lines),
                "world_version": world.world_version,
                "zones": zones,
                "stacks": stacks,
                "gripper": {"open": world.gripper.open, "width": world.gripper.width,
                            "held": world.gripper.held},
                "arm_zone": world.arm_zone,
                "machine_on": world.machine_on,
                "cabinet_door_open": world.cabinet_door_open,
                "machine_cover_open": world.machine_cover_open,
                "grid": world.to_dict()["grid"],
                "episodes": len(session.episodes),
                "flags": list(session.flags),
                "ledger_value": session.ledger_value(),
                "task_elapsed_s": session.task_elapsed_s,
                "state_hash": session.state_hash(),
            }

    def get_trace(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            return {
                "session_id": session.id,
                "episodes": [r.to_dict() for r in session.episodes],
                "ledger": {
                    "beta": session.config.beta,
                    "flags": list(session.flags),
                    "value": session.ledger_value(),
                },
            }

    def events_after(self, session_id: str, after: int = -1) -> list[Event]:
        session = self.get(session_id)
        with session.lock:
            return [e for e in session.events if e.id > after]

    def state_hash(self, session_id: str) -> str:
        return self.get(session_id).state_hash()

    # -- crash recovery ------------------------------------------------------

    def restore(self, session_id: str) -> Session:
        """Rebuild a session by replaying its persisted episode log."""
        if self.store_dir is None:
            raise BadConfig("service has no store directory")
        path = self.store_dir / f"{session_id}.jsonl"
        if not path.exists():
            raise UnknownSession(session_id)
        records = [json.loads(line) for line in path.read_text().splitlines()
                   if line.strip()]
        if not records or records[0].get("type") != "session":
            raise BadConfig(f"log for {session_id} does not start with a session record")
        config = SessionConfig.from_dict(records[0]["config"])
        transcript = {r["prompt_hash"]: r["response"]
                      for r in records if r.get("type") == "episode"}
        session = self.create_session(config, session_id=session_id,
                                      gateway=ReplayBackend(transcript),
                                      _log_creation=False)
        session._replaying = True
        try:
            for rec in records[1:]:
                kind = rec.get("type")
                if kind == "episode":
                    self.submit_message(session_id, rec["message"])
                elif kind == "perturbation":
                    cell = rec.get("new_cell")
                    self.inject_perturbation(
                        session_id, rec["object_id"], at_step=rec.get("at_step"),
                        new_zone=rec.get("new_zone"),
                        new_cell=tuple(cell) if cell else None)
                elif kind == "reset_world":
                    self.reset_world(session_id)
        finally:
            session._replaying = False
        # hand the restored session back to its configured backend
        try:
            session.gateway = self._build_gateway(session)
        except (BadConfig, RobochatError):
            pass  # keep the transcript gateway when the config cannot rebuild
        return session
