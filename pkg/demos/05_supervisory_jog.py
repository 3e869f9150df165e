"""
Driving the arm by voice-style jog commands
===========================================

The supervisory scenario is a small 5x5x3 jog grid with a cube, a bowl,
and a pillar of obstacle cells in the middle.  Every operator message is
a command ("go left twice, then go forward"), mapped through a strict
vocabulary to the movement primitives; anything outside the vocabulary
is refused and counts as a failed exchange.  A configurable delay with
jitter sits between operator and robot, as on a remote link.
"""
from robochat import (
    GatewayConfig,
    GoalClause,
    ScenarioConfig,
    SessionConfig,
    SessionService,
    SimClock,
    TaskSpec,
    goal_satisfied,
)

task = TaskSpec(
    id="jog", n_boxes=0,
    instruction="put the blue cube in the blue bowl",
    goals=(GoalClause("on", "blue cube", "blue bowl"),),
    seed=0)

clock = SimClock()
service = SessionService(clock=clock)
session = service.create_session(SessionConfig(
    scenario=ScenarioConfig(kind="supervisory"),
    gateway=GatewayConfig(backend="supervisory_script"),
    task_spec=task,
    latency_mean_s=2.5, latency_jitter_s=0.5))

print("start:", service.get_state(session.id)["grid"])

# -- four commands carry the cube around the obstacle into the bowl ----------

commands = [
    "go left twice, then go forward twice",
    "go down twice and close the gripper",
    "go up twice, then go forward twice",
    "go down twice and open the gripper",
]
total_steps = 0
for command in commands:
    episode = service.supervisory_step(session.id, command)
    outputs = ", ".join(s.output for s in episode.steps)
    print(f"\noperator: {command}")
    print(f"  (+{episode.latency_s:.2f} s link delay) {len(episode.steps)} "
          f"moves: {outputs}")
    total_steps += len(episode.steps)

print(f"\nprimitive moves executed: {total_steps}")
print(f"cube in bowl: {goal_satisfied(session.world, task)}")
print(f"simulated elapsed time: {clock.now:.2f} s")

# -- an out-of-vocabulary command is refused, not guessed at -----------------

vague = service.supervisory_step(session.id, "go but avoid the water")
print(f"\noperator: go but avoid the water")
print(f"  parse error: {vague.parse_error or '(none)'}")
print(f"  failure flag: {vague.behavior_failure}")
