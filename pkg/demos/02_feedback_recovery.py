"""
Corrective feedback repairs a bad plan
======================================

The corrupting gateway deliberately damages the first reply it gives
(here it swaps two steps, so the robot tries to drop a cube it never
picked up).  The failed trace and the scene stay available, a human
sends one corrective sentence, and the next reply is clean.  The ledger
keeps both entries: a failed behavior costs -(1+1), a clean one -(1+0).
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

task = TaskSpec(
    id="recovery", n_boxes=3,
    instruction="put the red cube in the sink",
    goals=(GoalClause("in_zone", "red cube", "sink"),),
    seed=42)

service = SessionService(clock=SimClock())
session = service.create_session(SessionConfig(
    scenario=ScenarioConfig(kind="tabletop", n_boxes=3, seed=42),
    gateway=GatewayConfig(backend="corrupting", corruption_seed=3),
    task_spec=task,
    beta=0.9))

# -- attempt 1: the reply arrives with the grasp and the drop swapped --------

first = service.submit_message(session.id, task.instruction)
print("attempt 1 steps:")
for step in first.steps:
    mark = "FAIL" if step.failure else "ok"
    print(f"  {step.index + 1}. {step.name}({step.input}) -> {step.output} [{mark}]")
print(f"attempt 1 failure flag: {first.behavior_failure}")

# -- one corrective sentence; the gateway honors it on the retry -------------

feedback = "The order is wrong. Pick the cube up before dropping it."
print(f"\nhuman: {feedback}")
second = service.submit_message(session.id, feedback)
print("attempt 2 steps:")
for step in second.steps:
    mark = "FAIL" if step.failure else "ok"
    print(f"  {step.index + 1}. {step.name}({step.input}) -> {step.output} [{mark}]")
print(f"attempt 2 failure flag: {second.behavior_failure}")
print(f"goal satisfied: {second.goal_met}")

# -- the discounted ledger shows the price of the failed first try -----------

print(f"\nflags: {session.flags}")
print(f"ledger value at beta=0.9: {session.ledger_value():.2f}")
print("  (= -(1+1) for the failed try, then -0.9*(1+0) for the clean one)")
