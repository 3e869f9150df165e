"""
Teaching the robot a motion by showing it once
==============================================

A demonstrated trajectory (here a smooth one-dimensional reach, sampled
like a recorded end-effector path) is fitted into a compact movement
model: a spring-damper pulled toward the goal plus a learned forcing
term on a decaying phase.  The fitted model rolls out an imitation of
the demo, generalizes to a new goal, and registers itself in the action
library as a callable skill with the demonstrator's own description.
"""
import numpy as np

from robochat import (
    ActionRouter,
    ActionStep,
    Behavior,
    DemonstrationTrajectory,
    SkillStore,
    builtin_library,
    fit,
    register_skill,
    render_library_description,
    reset,
    rollout,
    run_behavior,
)

# -- a smooth point-to-point demonstration -----------------------------------


def smooth_reach(t, start, goal, duration):
    s = np.clip(t / duration, 0.0, 1.0)
    return start + (goal - start) * (10 * s**3 - 15 * s**4 + 6 * s**5)


t = np.linspace(0.0, 1.5, 120)
demo = DemonstrationTrajectory(times=t, positions=smooth_reach(t, 0.2, 0.9, 1.5))
model = fit(demo, n_basis=50)
print(f"fitted: {model.n_basis} bases per dimension, duration {model.duration} s")

# -- playback fidelity -------------------------------------------------------

played = rollout(model, dt=0.005)
ref = smooth_reach(played.times, 0.2, 0.9, 1.5)
rmse = float(np.sqrt(np.mean((played.positions[:, 0] - ref) ** 2)))
print(f"imitation error over the demo window: rmse {rmse:.4f} "
      f"({100 * rmse / 0.7:.2f}% of the travel)")

# -- the same motion shape, retargeted to a new goal -------------------------

far = rollout(model, dt=0.005, goal=np.array([1.4]), duration_factor=1.5)
print(f"retargeted rollout ends at {far.positions[-1, 0]:.3f} "
      f"(new goal 1.400)")

# -- registration makes it a first-class action ------------------------------

library = builtin_library()
skills = SkillStore()
name = register_skill(model, "reach across the counter", library, skills)
print(f"\nregistered as: {name}")
for line in render_library_description(library).splitlines():
    if name in line:
        print(f"library entry: {line}")

# -- and the engine can play it inside any behavior --------------------------

world = reset("tabletop", n_boxes=2, seed=5)
router = ActionRouter(library, skill_store=skills)
trace = run_behavior(
    Behavior(mode="sequence", steps=(ActionStep(name, ""),)),
    world, router, [])
step = trace.steps[0]
print(f"\nexecuted in a behavior: {step.name}() -> {step.output}")
print(f"behavior failure flag: {trace.behavior_failure}")
