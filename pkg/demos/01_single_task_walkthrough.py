"""
One task, end to end
====================

A chat session against the simulated tabletop: the first message sets
the task, the gateway answers with a fenced action sequence, the engine
executes it step by step, and the ledger records the discounted score.
This walkthrough uses the oracle gateway, which always answers with the
ground-truth plan, so every piece of the pipeline is visible without an
LLM endpoint.
"""
from robochat import (
    GatewayConfig,
    GoalClause,
    ScenarioConfig,
    SessionConfig,
    SessionService,
    SimClock,
    TaskSpec,
)

# -- a three-cube scene and a one-clause task --------------------------------

task = TaskSpec(
    id="walkthrough", n_boxes=3,
    instruction="put the red cube in the sink",
    goals=(GoalClause("in_zone", "red cube", "sink"),),
    seed=42)

service = SessionService(clock=SimClock())
session = service.create_session(SessionConfig(
    scenario=ScenarioConfig(kind="tabletop", n_boxes=3, seed=42),
    gateway=GatewayConfig(backend="oracle"),
    mode="sequence",
    task_spec=task))

print("scene before:")
for line in service.get_state(session.id)["observation_lines"]:
    print("  " + line)

# -- the first message becomes the task and runs one episode -----------------

episode = service.submit_message(session.id, task.instruction)

print("\ngateway reply:")
for line in episode.response_text.splitlines():
    print("  " + line)

print("\nexecuted steps:")
for step in episode.steps:
    mark = "FAIL" if step.failure else "ok"
    print(f"  {step.index + 1}. {step.name}({step.input}) -> {step.output} [{mark}]")

# -- scoring: one behavior, no failure, so the entry at tau=0 is -(1+0) ------

print(f"\nbehavior failure flag: {episode.behavior_failure}")
print(f"goal satisfied: {episode.goal_met}")
print(f"ledger value: {session.ledger_value()}")

state = service.get_state(session.id)
print("\nscene after:")
for line in state["observation_lines"]:
    print("  " + line)
