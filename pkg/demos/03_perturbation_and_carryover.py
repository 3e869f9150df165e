"""
A moved target, a lesson learned, a lesson reused
=================================================

The scene can be perturbed mid-run: here the target cube is moved away
at the exact moment the grasp begins, so the robot reaches where it last
saw the cube and closes on air.  One corrective sentence fixes the habit
(look again right before grasping).  The same sentence is then loaded
into a brand new session as carryover knowledge, and that session gets
the task right on its very first try despite the same trap.
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
    id="perturbed", n_boxes=3,
    instruction="put the red cube in the sink",
    goals=(GoalClause("in_zone", "red cube", "sink"),),
    seed=42)

config = SessionConfig(
    scenario=ScenarioConfig(kind="tabletop", n_boxes=3, seed=42),
    gateway=GatewayConfig(backend="oracle"),
    task_spec=task)

service = SessionService(clock=SimClock())

# -- session 1, attempt 1: the cube moves right before the grasp -------------

first = service.create_session(config)
service.inject_perturbation(first.id, "red_cube", at_step=1,
                            new_zone="table_right")
attempt1 = service.submit_message(first.id, task.instruction)
print("attempt 1:")
for step in attempt1.steps:
    mark = "FAIL" if step.failure else "ok"
    print(f"  {step.index + 1}. {step.name}({step.input}) -> {step.output} [{mark}]")
print(f"  failure flag: {attempt1.behavior_failure}")

# -- attempt 2: the human explains what went wrong ---------------------------

advice = "Check where the cube is right before grasping it."
print(f"\nhuman: {advice}")
attempt2 = service.submit_message(first.id, advice)
print("attempt 2:")
for step in attempt2.steps:
    mark = "FAIL" if step.failure else "ok"
    print(f"  {step.index + 1}. {step.name}({step.input}) -> {step.output} [{mark}]")
print(f"  failure flag: {attempt2.behavior_failure}, goal met: {attempt2.goal_met}")

# -- session 2: same trap, but the advice ships with the config --------------

carry = SessionConfig(**{**config.__dict__, "carryover_feedback": (advice,)})
second = service.create_session(carry)
service.inject_perturbation(second.id, "red_cube", at_step=1,
                            new_zone="table_right")
only = service.submit_message(second.id, task.instruction)
print("\nfresh session with carryover, first try:")
for step in only.steps:
    mark = "FAIL" if step.failure else "ok"
    print(f"  {step.index + 1}. {step.name}({step.input}) -> {step.output} [{mark}]")
print(f"  failure flag: {only.behavior_failure}, goal met: {only.goal_met}")
print(f"  human turns spent beyond the task itself: "
      f"{len(second.episodes) - 1}")
