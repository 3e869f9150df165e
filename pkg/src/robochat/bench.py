"""Benchmark harness and command line entry point.

Generates deterministic tabletop tasks (sizes 2..8, five per size by
default), runs them through the full pipeline with a chosen gateway,
applies a scripted corrective-feedback policy on first-attempt
failures, tags every failure with a cause, and emits byte-stable CSV.
Also hosts the phrasing-sensitivity corpus and the coffee end-to-end
check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .clocks import SimClock, WallClock
from .engine import compute_return
from .errors import RobochatError
from .gateway import GatewayConfig
from .parsing import Behavior, fsm_to_sequence, tree_to_sequence
from .session import ScenarioConfig, SessionConfig, SessionService
from .tasks import GoalClause, TaskSpec
from .world import ground_truth_plan, goal_satisfied, reset

CAUSE_TAGS = ("parse", "unknown_action", "wrong_order", "wrong_target", "env_failure")
DEFAULT_SIZES = tuple(range(2, 9))
DEFAULT_PER_SIZE = 5
DEFAULT_SEED = 42


# --- task generation --------------------------------------------------------

def generate_tasks(sizes=DEFAULT_SIZES, per_size: int = DEFAULT_PER_SIZE,
                   master_seed: int = DEFAULT_SEED) -> list[TaskSpec]:
    """Deterministic tasks over deterministic scenes, sound by construction."""
    tasks = []
    for n in sizes:
        for k in range(per_size):
            rng = random.Random(f"{master_seed}:{n}:{k}")
            scene_seed = rng.randrange(1_000_000)
            scene = reset("tabletop", n_boxes=n, seed=scene_seed)
            colors = _unique_colors(scene)
            task = _build_task(n, k, scene_seed, colors, rng)
            _assert_sound(scene, task)
            tasks.append(task)
    return tasks


def _unique_colors(scene) -> list[str]:
    counts: dict[str, int] = {}
    for obj in scene.objects.values():
        counts[obj.color] = counts.get(obj.color, 0) + 1
    return [o.color for o in scene.objects.values() if counts[o.color] == 1]


def _build_task(n: int, k: int, scene_seed: int, colors: list[str],
                rng: random.Random) -> TaskSpec:
    picked = rng.sample(colors, min(3, len(colors)))
    c1, c2 = picked[0], picked[1]
    c3 = picked[2] if len(picked) > 2 else None
    shape = k % 5
    if shape == 0:
        zone = rng.choice(["sink", "bowl"])
        where = "in the sink" if zone == "sink" else "in the bowl"
        goals = (GoalClause("in_zone", f"{c1} cube", zone),)
        text = f"put the {c1} cube {where}"
    elif shape == 1:
        goals = (GoalClause("on", f"{c1} cube", f"{c2} cube"),)
        text = f"stack the {c1} cube on the {c2} cube"
    elif shape == 2 and c3 is not None:
        goals = (GoalClause("on", f"{c1} cube", f"{c2} cube"),
                 GoalClause("on", f"{c2} cube", f"{c3} cube"))
        text = (f"stack the {c1} cube on the {c2} cube and the {c2} cube "
                f"on the {c3} cube")
    elif shape == 3 and c3 is not None:
        goals = (GoalClause("in_zone", f"{c1} cube", "sink"),
                 GoalClause("on", f"{c2} cube", f"{c3} cube"))
        text = (f"put the {c1} cube in the sink, then stack the {c2} cube "
                f"on the {c3} cube")
    else:
        goals = (GoalClause("in_zone", f"{c1} cube", "sink"),
                 GoalClause("in_zone", f"{c2} cube", "bowl"))
        text = f"put the {c1} cube in the sink and the {c2} cube in the bowl"
    return TaskSpec(id=f"t{n}_{k}", n_boxes=n, instruction=text, goals=goals,
                    seed=scene_seed)


def _assert_sound(scene, task: TaskSpec) -> None:
    from .actions import builtin_library
    from .engine import ActionRouter, run_sequence
    from .parsing import ActionStep

    plan = ground_truth_plan(scene, task)
    router = ActionRouter(builtin_library())
    trace = run_sequence([ActionStep(n, a) for n, a in plan], scene, router)
    if trace.behavior_failure or not goal_satisfied(trace.final_state, task):
        raise RobochatError(f"generated task {task.id} is unsolvable by its own plan")


# --- benchmark run ----------------------------------------------------------

@dataclass
class BenchResult:
    task_id: str
    n_boxes: int
    mode: str
    condition: str                 # no_feedback | with_feedback
    attempt_1_success: bool
    attempt_2_success: bool | None
    steps_attempt_1: int
    steps_attempt_2: int
    cause: str
    feedback: str
    wall_ms: float

    @property
    def success(self) -> bool:
        return self.attempt_1_success or bool(self.attempt_2_success)


@dataclass
class BenchReport:
    mode: str
    condition: str
    gateway: str
    results: list[BenchResult] = field(default_factory=list)

    def per_size_rate(self) -> dict[int, float]:
        by_size: dict[int, list[BenchResult]] = {}
        for r in self.results:
            by_size.setdefault(r.n_boxes, []).append(r)
        return {n: sum(r.success for r in rs) / len(rs)
                for n, rs in sorted(by_size.items())}

    def overall_rate(self) -> float:
        if not self.results:
            return 0.0
        return sum(r.success for r in self.results) / len(self.results)


def run_benchmark(tasks: list[TaskSpec], gateway_cfg: GatewayConfig,
                  feedback: str = "none", mode: str = "sequence",
                  beta: float = 1.0) -> BenchReport:
    condition = "with_feedback" if feedback == "scripted" else "no_feedback"
    report = BenchReport(mode=mode, condition=condition,
                         gateway=gateway_cfg.backend)
    clock = WallClock() if gateway_cfg.backend == "http" else SimClock()
    service = SessionService(clock=clock)
    for index, task in enumerate(tasks):
        report.results.append(
            _run_task(service, clock, task, index, gateway_cfg, feedback, mode, beta))
    return report


def _per_task_gateway(gateway_cfg: GatewayConfig, index: int) -> GatewayConfig:
    if gateway_cfg.backend == "corrupting":
        # spread mutation kinds across the suite while staying seed-stable
        from dataclasses import replace
        return replace(gateway_cfg,
                       corruption_seed=gateway_cfg.corruption_seed + index)
    return gateway_cfg


def _run_task(service: SessionService, clock, task: TaskSpec, index: int,
              gateway_cfg: GatewayConfig, feedback: str, mode: str,
              beta: float) -> BenchResult:
    started = clock.monotonic()
    config = SessionConfig(
        scenario=ScenarioConfig(kind="tabletop", n_boxes=task.n_boxes,
                                seed=task.seed),
        gateway=_per_task_gateway(gateway_cfg, index),
        mode=mode,
        beta=beta,
        task_spec=task,
    )
    session = service.create_session(config)
    ep1 = service.submit_message(session.id, task.instruction)
    success1 = _attempt_success(service, session.id, task, ep1)
    cause = ""
    fb_text = ""
    success2: bool | None = None
    steps2 = 0
    if not success1 and feedback == "scripted":
        fb_text, cause = feedback_policy(service, session.id, task, ep1)
        ep1.cause = cause
        service.reset_world(session.id)
        ep2 = service.submit_message(session.id, fb_text)
        success2 = _attempt_success(service, session.id, task, ep2)
        steps2 = len(ep2.steps)
    elif not success1:
        _, cause = feedback_policy(service, session.id, task, ep1)
        ep1.cause = cause
    return BenchResult(
        task_id=task.id, n_boxes=task.n_boxes, mode=mode,
        condition="with_feedback" if feedback == "scripted" else "no_feedback",
        attempt_1_success=success1, attempt_2_success=success2,
        steps_attempt_1=len(ep1.steps), steps_attempt_2=steps2,
        cause=cause, feedback=fb_text,
        wall_ms=(clock.monotonic() - started) * 1000.0,
    )


def _attempt_success(service: SessionService, session_id: str, task: TaskSpec,
                     episode) -> bool:
    if episode.behavior_failure or not episode.goal_met:
        return False
    if not task.order_constrained:
        return True
    oracle = ground_truth_plan(reset("tabletop", n_boxes=task.n_boxes,
                                     seed=task.seed), task)
    want = [arg for name, arg in oracle if name == "place_on"]
    got = [s.input for s in episode.steps if s.name == "place_on" and not s.failure]
    return got == want


# --- scripted feedback ------------------------------------------------------

def feedback_policy(service: SessionService, session_id: str, task: TaskSpec,
                    episode) -> tuple[str, str]:
    """Corrective string plus cause tag for a failed first attempt."""
    if episode.parse_error:
        return ("Answer with a single fenced code block in the requested format.",
                "parse")
    if episode.error.startswith("unknown actions"):
        return ("Use only actions from the listed library.", "unknown_action")
    if any(s.output == "camera occluded by arm" for s in episode.steps):
        return ("Please home the arm before looking for the cube.", "env_failure")
    attempted = _flatten_response(episode.response_text)
    oracle = ground_truth_plan(reset("tabletop", n_boxes=task.n_boxes,
                                     seed=task.seed), task)
    kind, detail = _diff_plans(oracle, attempted)
    if kind == "swap":
        return (f"The order is wrong. Follow the instruction exactly: "
                f"{task.instruction}.", "wrong_order")
    if kind == "rename":
        return (f"That is not the right object. Use the {detail}.", "wrong_target")
    return (f"A step went wrong. Do the full task again: {task.instruction}.",
            "env_failure")


def _flatten_response(text: str) -> list[tuple[str, str]]:
    from .parsing import parse_response

    try:
        behavior = parse_response(text)
    except RobochatError:
        return []
    try:
        if behavior.mode == "tree":
            steps = tree_to_sequence(behavior.root)
        elif behavior.mode == "fsm":
            steps = fsm_to_sequence(behavior.fsm)
        else:
            steps = behavior.steps
    except RobochatError:
        return []
    return [(s.name, s.input) for s in steps]


def _diff_plans(oracle: list[tuple[str, str]], attempted: list[tuple[str, str]]):
    """Classify the attempted plan against the oracle: swap, drop, or rename."""
    if len(attempted) == len(oracle) - 1:
        return "drop", ""
    if len(attempted) == len(oracle):
        mismatches = [i for i, (a, b) in enumerate(zip(oracle, attempted)) if a != b]
        if len(mismatches) == 2:
            i, j = mismatches
            if oracle[i] == attempted[j] and oracle[j] == attempted[i]:
                return "swap", ""
        if len(mismatches) == 1:
            i = mismatches[0]
            if oracle[i][0] == attempted[i][0]:
                return "rename", oracle[i][1]
    return "other", ""


# --- sensitivity corpus -----------------------------------------------------

@dataclass(frozen=True)
class SensitivityPair:
    id: str
    n_boxes: int
    scene_seed: int
    template_a: str
    template_b: str
    goals_template: str            # which canonical goal the pair shares


def _corpus_pairs() -> list[SensitivityPair]:
    return [
        SensitivityPair("another_vs_other", 2, 11,
                        "put the {c1} cube in the sink, then put another cube in the bowl",
                        "put the {c1} cube in the sink, then put the other cube in the bowl",
                        "two_zone"),
        SensitivityPair("on_vs_on_top_of", 3, 12,
                        "put the {c1} cube on the {c2} cube",
                        "put the {c1} cube on top of the {c2} cube",
                        "stack"),
        SensitivityPair("put_vs_move", 2, 13,
                        "put the {c1} cube in the sink",
                        "move the {c1} cube to the sink",
                        "one_sink"),
        SensitivityPair("in_vs_to_bowl", 2, 14,
                        "put the {c1} cube in the bowl",
                        "put the {c1} cube to the bowl",
                        "one_bowl"),
    ]


def _pair_task(pair: SensitivityPair) -> tuple[TaskSpec, str, str]:
    scene = reset("tabletop", n_boxes=pair.n_boxes, seed=pair.scene_seed)
    colors = [o.color for o in scene.objects.values()]
    c1, c2 = colors[0], colors[1]
    if pair.goals_template == "two_zone":
        goals = (GoalClause("in_zone", f"{c1} cube", "sink"),
                 GoalClause("in_zone", f"{c2} cube", "bowl"))
    elif pair.goals_template == "stack":
        goals = (GoalClause("on", f"{c1} cube", f"{c2} cube"),)
    elif pair.goals_template == "one_sink":
        goals = (GoalClause("in_zone", f"{c1} cube", "sink"),)
    else:
        goals = (GoalClause("in_zone", f"{c1} cube", "bowl"),)
    task = TaskSpec(id=pair.id, n_boxes=pair.n_boxes, instruction="",
                    goals=goals, seed=pair.scene_seed)
    subs = {"c1": c1, "c2": c2}
    return task, pair.template_a.format(**subs), pair.template_b.format(**subs)


@dataclass
class SensitivityRow:
    pair_id: str
    text_a: str
    text_b: str
    parsed_a: bool
    parsed_b: bool
    equal: bool


@dataclass
class SensitivityReport:
    rows: list[SensitivityRow] = field(default_factory=list)

    @property
    def all_equal(self) -> bool:
        return all(r.equal for r in self.rows)


def run_sensitivity_corpus(gateway_cfg: GatewayConfig) -> SensitivityReport:
    """Run each phrasing of each pair and compare the parsed behaviors."""
    report = SensitivityReport()
    service = SessionService(clock=SimClock())
    for pair in _corpus_pairs():
        task, text_a, text_b = _pair_task(pair)
        behaviors = []
        for text in (text_a, text_b):
            config = SessionConfig(
                scenario=ScenarioConfig(kind="tabletop", n_boxes=pair.n_boxes,
                                        seed=pair.scene_seed),
                gateway=gateway_cfg, task_spec=task)
            session = service.create_session(config)
            episode = service.submit_message(session.id, text)
            behaviors.append(_parse_or_none(episode.response_text))
        a, b = behaviors
        report.rows.append(SensitivityRow(
            pair_id=pair.id, text_a=text_a, text_b=text_b,
            parsed_a=a is not None, parsed_b=b is not None,
            equal=a is not None and b is not None and a == b))
    return report


def _parse_or_none(text: str) -> Behavior | None:
    from .parsing import parse_response

    try:
        return parse_response(text)
    except RobochatError:
        return None


# --- CSV --------------------------------------------------------------------

CSV_COLUMNS = ("task_id", "n_boxes", "mode", "condition", "attempt_1_success",
               "attempt_2_success", "steps_attempt_1", "steps_attempt_2",
               "cause", "feedback", "wall_ms")


def report_to_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.results:
        writer.writerow([
            r.task_id, r.n_boxes, r.mode, r.condition,
            int(r.attempt_1_success),
            "" if r.attempt_2_success is None else int(r.attempt_2_success),
            r.steps_attempt_1, r.steps_attempt_2, r.cause, r.feedback,
            f"{r.wall_ms:.3f}",
        ])
    return buf.getvalue()


# --- property gates ---------------------------------------------------------

def check_gates(report: BenchReport, baseline: BenchReport | None = None) -> list[str]:
    """Names of violated gates; empty means a clean run."""
    violations = []
    if report.gateway == "oracle" and report.overall_rate() < 1.0:
        violations.append("oracle_soundness")
    for r in report.results:
        if not r.success and r.condition == "with_feedback" and not r.cause:
            violations.append(f"missing_cause:{r.task_id}")
    if baseline is not None:
        with_rates = report.per_size_rate()
        without_rates = baseline.per_size_rate()
        for n in sorted(without_rates):
            if with_rates.get(n, 0.0) < without_rates[n]:
                violations.append(f"feedback_not_monotone:size_{n}")
    return violations


# --- coffee end-to-end ------------------------------------------------------

def run_coffee(mode: str = "sequence", beta: float = 1.0):
    service = SessionService(clock=SimClock())
    config = SessionConfig(
        scenario=ScenarioConfig(kind="coffee"),
        gateway=GatewayConfig(backend="oracle"),
        mode=mode, beta=beta)
    session = service.create_session(config)
    episode = service.submit_message(session.id, "make me a coffee")
    world = session.world
    mug = world.objects["mug"]
    ok = (episode.behavior_failure == 0
          and world.machine_on
          and mug.location.kind == "zone" and mug.location.ref == "machine"
          and not world.cabinet_door_open
          and not world.machine_cover_open)
    return session, episode, ok


# --- CLI --------------------------------------------------------------------

def _parse_sizes(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(p) for p in text.split(",") if p)


def _parse_gateway(text: str) -> GatewayConfig:
    kind, _, rest = text.partition(":")
    if kind == "oracle":
        return GatewayConfig(backend="oracle")
    if kind == "corrupting":
        return GatewayConfig(backend="corrupting",
                             corruption_seed=int(rest or "0"))
    if kind == "replay":
        return GatewayConfig(backend="replay", transcript_path=rest)
    if kind == "http":
        return GatewayConfig(backend="http", base_url=rest)
    raise argparse.ArgumentTypeError(f"unknown gateway {text!r}")


def build_cli() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="task benchmark, sensitivity corpus, and coffee check")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the task benchmark")
    run_p.add_argument("--sizes", default="2..8", type=_parse_sizes)
    run_p.add_argument("--per-size", default=DEFAULT_PER_SIZE, type=int)
    run_p.add_argument("--seed", default=DEFAULT_SEED, type=int)
    run_p.add_argument("--gateway", default="oracle", type=_parse_gateway)
    run_p.add_argument("--feedback", default="none", choices=("none", "scripted"))
    run_p.add_argument("--mode", default="sequence",
                       choices=("sequence", "tree", "fsm", "script"))
    run_p.add_argument("--beta", default=1.0, type=float)
    run_p.add_argument("--out", default="")

    tasks_p = sub.add_parser("tasks", help="emit the generated task list")
    tasks_p.add_argument("--sizes", default="2..8", type=_parse_sizes)
    tasks_p.add_argument("--per-size", default=DEFAULT_PER_SIZE, type=int)
    tasks_p.add_argument("--seed", default=DEFAULT_SEED, type=int)
    tasks_p.add_argument("--emit", default="")

    sens_p = sub.add_parser("sensitivity", help="run the phrasing corpus")
    sens_p.add_argument("--gateway", default="oracle", type=_parse_gateway)

    coffee_p = sub.add_parser("coffee", help="run the coffee scenario end to end")
    coffee_p.add_argument("--mode", default="sequence",
                          choices=("sequence", "tree", "fsm", "script"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_cli().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "tasks":
        return _cmd_tasks(args)
    if args.command == "sensitivity":
        return _cmd_sensitivity(args)
    return _cmd_coffee(args)


def _cmd_run(args) -> int:
    tasks = generate_tasks(args.sizes, args.per_size, args.seed)
    report = run_benchmark(tasks, args.gateway, feedback=args.feedback,
                           mode=args.mode, beta=args.beta)
    baseline = None
    if args.feedback == "scripted":
        baseline = run_benchmark(tasks, args.gateway, feedback="none",
                                 mode=args.mode, beta=args.beta)
    text = report_to_csv(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for n, rate in report.per_size_rate().items():
        print(f"size {n}: success {rate:.2f}", file=sys.stderr)
    violations = check_gates(report, baseline)
    for v in violations:
        print(f"gate violated: {v}", file=sys.stderr)
    return 1 if violations else 0


def _cmd_tasks(args) -> int:
    tasks = generate_tasks(args.sizes, args.per_size, args.seed)
    payload = json.dumps({
        "master_seed": args.seed,
        "sizes": list(args.sizes),
        "per_size": args.per_size,
        "tasks": [t.to_dict() for t in tasks],
    }, indent=2)
    if args.emit:
        Path(args.emit).write_text(payload + "\n")
    else:
        print(payload)
    return 0


def _cmd_sensitivity(args) -> int:
    report = run_sensitivity_corpus(args.gateway)
    for row in report.rows:
        mark = "same" if row.equal else "DIVERGES"
        print(f"{row.pair_id}: {mark}")
        print(f"  a: {row.text_a}")
        print(f"  b: {row.text_b}")
    print(f"pairs equal: {sum(r.equal for r in report.rows)}/{len(report.rows)}")
    return 0


def _cmd_coffee(args) -> int:
    session, episode, ok = run_coffee(mode=args.mode)
    for step in episode.steps:
        print(f"{step.index + 1:2d}. {step.name}({step.input}) -> {step.output}")
    world = session.world
    print(f"machine_on={world.machine_on} door_open={world.cabinet_door_open} "
          f"cover_open={world.machine_cover_open} "
          f"behavior_failure={episode.behavior_failure}")
    print("coffee ready" if ok else "coffee FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
