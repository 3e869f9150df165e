"""Runs parsed behaviors against the world and scores episodes.

Three executors share one step stream contract: steps are recorded in
execution order, each step's prev_output is the previous step's output
(the first gets ""), and the behavior-level failure flag is 0 exactly
when the behavior as a whole succeeded.  Sequences abort at the first
failing step; trees map step failures to tick statuses; state machines
follow their transition graph.

The return of an episode history is sum over tau of
-beta**tau * (1 + flag_tau): every behavior costs at least 1, failures
cost double, and beta in (0, 1] discounts late behaviors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import httpx

from .actions import ActionLibrary
from .errors import BadBeta, BadFlag, UnknownBuiltin, UnvalidatedBehavior
from .parsing import ActionStep, Behavior, FsmGraph, TreeNode
from .world import ActionResult, PerturbationEvent, WorldState, apply_perturbation, execute_atomic

TICK_BUDGET = 10_000     # leaf executions per tree tick
FSM_STEP_CAP = 100       # state executions per machine run


def compute_return(flags, beta: float) -> float:
    """Discounted cost of an episode history of behavior failure flags."""
    if not isinstance(beta, (int, float)) or isinstance(beta, bool) \
            or not 0 < beta <= 1:
        raise BadBeta(f"beta must satisfy 0 < beta <= 1, got {beta!r}")
    total = 0.0
    discount = 1.0
    for f in flags:
        if isinstance(f, bool):
            f = int(f)
        if f not in (0, 1):
            raise BadFlag(f"failure flags are 0 or 1, got {f!r}")
        total -= discount * (1 + f)
        discount *= beta
    return total


@dataclass(frozen=True)
class StepResult:
    index: int
    name: str
    input: str
    prev_output: str
    output: str
    failure: int
    node_path: str = ""


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[StepResult, ...]
    behavior_failure: int
    final_state: WorldState
    error: str = ""          # tick budget / step cap notes, empty otherwise

    def step_flags(self) -> list[int]:
        return [s.failure for s in self.steps]

    def step_return(self, beta: float) -> float:
        """Diagnostic: the return of the atomic-step flags of this one trace."""
        return compute_return(self.step_flags(), beta)


class ActionRouter:
    """Resolves action names through the library to their executors."""

    def __init__(self, library: ActionLibrary, skill_store=None,
                 http_client: httpx.Client | None = None):
        self.library = library
        self.skill_store = skill_store
        self._http = http_client

    def known(self, name: str) -> bool:
        return name in self.library

    def execute(self, state: WorldState, name: str, input_text: str,
                prev_output: str) -> tuple[WorldState, ActionResult]:
        if name not in self.library:
            raise UnknownBuiltin(name)
        endpoint = self.library.get(name).endpoint
        if endpoint.kind == "sim_builtin":
            return execute_atomic(state, endpoint.target, input_text, prev_output)
        if endpoint.kind == "dmp_skill":
            return self._run_skill(state, name, endpoint.target, input_text)
        return self._run_bridge(state, name, endpoint, input_text, prev_output)

    def _run_skill(self, state, name, skill_id, input_text):
        ok, detail = self.skill_store.play(skill_id)
        nxt = state.clone()
        nxt.step_count += 1
        if ok:
            result = ActionResult(name, input_text, f"skill {skill_id} complete ({detail})", 0)
        else:
            result = ActionResult(name, input_text, f"skill {skill_id} failed: {detail}", 1)
        return nxt, result

    def _run_bridge(self, state, name, endpoint, input_text, prev_output):
        nxt = state.clone()
        nxt.step_count += 1
        client = self._http or httpx.Client()
        owned = self._http is None
        try:
            resp = client.post(
                endpoint.target,
                json={"name": name, "input": input_text, "prev_output": prev_output},
                timeout=endpoint.timeout_s,
            )
            data = resp.json()
            output = str(data.get("output", ""))
            failure = 1 if data.get("failure", 1) else 0
        except httpx.TimeoutException:
            output, failure = "endpoint timeout", 1
        except Exception:
            output, failure = "endpoint unreachable", 1
        finally:
            if owned:
                client.close()
        return nxt, ActionResult(name, input_text, output, failure)


class _BudgetExhausted(Exception):
    pass


class _Run:
    """Shared bookkeeping for one behavior execution."""

    def __init__(self, state: WorldState, router: ActionRouter,
                 interrupts: list[PerturbationEvent] | None, budget: int):
        self.state = state
        self.router = router
        self.interrupts = list(interrupts or [])
        self.budget = budget
        self.steps: list[StepResult] = []
        self.prev_output = ""

    def run_leaf(self, name: str, input_text: str, node_path: str) -> int:
        if len(self.steps) >= self.budget:
            raise _BudgetExhausted
        index = len(self.steps)
        for event in [e for e in self.interrupts if e.at_step == index]:
            self.state = apply_perturbation(self.state, event)
            self.interrupts.remove(event)
        self.state, result = self.router.execute(
            self.state, name, input_text, self.prev_output)
        self.steps.append(StepResult(
            index=index, name=name, input=input_text,
            prev_output=self.prev_output, output=result.output,
            failure=result.failure, node_path=node_path))
        self.prev_output = result.output
        return result.failure


def _check_names(names, router: ActionRouter) -> None:
    unknown = [n for n in names if not router.known(n)]
    if unknown:
        raise UnvalidatedBehavior(f"unknown actions: {sorted(set(unknown))}")


def run_sequence(steps, state: WorldState, router: ActionRouter,
                 interrupts=None) -> ExecutionTrace:
    _check_names((s.name for s in steps), router)
    run = _Run(state, router, interrupts, TICK_BUDGET)
    failure = 0
    for i, step in enumerate(steps):
        if run.run_leaf(step.name, step.input, str(i)):
            failure = 1
            break  # abort at the first failing step
    return ExecutionTrace(steps=tuple(run.steps), behavior_failure=failure,
                          final_state=run.state)


def run_tree(root: TreeNode, state: WorldState, router: ActionRouter,
             interrupts=None) -> ExecutionTrace:
    names: list[str] = []

    def collect(node: TreeNode):
        if node.kind in ("action", "condition"):
            names.append(node.name)
        for c in node.children:
            collect(c)

    collect(root)
    _check_names(names, router)
    run = _Run(state, router, interrupts, TICK_BUDGET)
    try:
        ok = _tick(root, run, "0")
        return ExecutionTrace(steps=tuple(run.steps),
                              behavior_failure=0 if ok else 1,
                              final_state=run.state)
    except _BudgetExhausted:
        return ExecutionTrace(steps=tuple(run.steps), behavior_failure=1,
                              final_state=run.state, error="tick budget exhausted")


def _tick(node: TreeNode, run: _Run, path: str) -> bool:
    """One tick; True means Success."""
    if node.kind in ("action", "condition"):
        return run.run_leaf(node.name, node.input, path) == 0
    if node.kind == "sequence":
        return all(_tick(c, run, f"{path}/{i}") for i, c in enumerate(node.children))
    if node.kind == "fallback":
        return any(_tick(c, run, f"{path}/{i}") for i, c in enumerate(node.children))
    if node.kind == "parallel":
        wins = sum(_tick(c, run, f"{path}/{i}") for i, c in enumerate(node.children))
        return wins >= node.threshold
    if node.kind == "inverter":
        return not _tick(node.children[0], run, f"{path}/0")
    # retry: attempts until success, at most num
    last = False
    for attempt in range(node.num):
        last = _tick(node.children[0], run, f"{path}/0")
        if last:
            break
    return last


def run_fsm(graph: FsmGraph, state: WorldState, router: ActionRouter,
            interrupts=None) -> ExecutionTrace:
    states = graph.state_map()
    terminals = graph.terminal_map()
    _check_names((d.action for d in states.values()), router)
    run = _Run(state, router, interrupts, TICK_BUDGET)
    cur = graph.initial
    for _ in range(FSM_STEP_CAP):
        if cur in terminals:
            return ExecutionTrace(
                steps=tuple(run.steps),
                behavior_failure=0 if terminals[cur] == "success" else 1,
                final_state=run.state)
        d = states[cur]
        failed = run.run_leaf(d.action, d.input, cur)
        cur = d.on_failure if failed else d.on_success
    return ExecutionTrace(steps=tuple(run.steps), behavior_failure=1,
                          final_state=run.state, error="step cap exceeded")


def run_behavior(behavior: Behavior, state: WorldState, router: ActionRouter,
                 interrupts=None) -> ExecutionTrace:
    if behavior.mode == "sequence":
        return run_sequence(behavior.steps, state, router, interrupts)
    if behavior.mode == "tree":
        return run_tree(behavior.root, state, router, interrupts)
    return run_fsm(behavior.fsm, state, router, interrupts)
