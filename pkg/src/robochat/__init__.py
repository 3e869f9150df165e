"""Language-driven robot control: prompts in, validated behaviors out,
executed against a deterministic simulated workspace with a discounted
failure ledger, corrective-feedback loop, demonstration-learned motion
skills, and a remote supervisory mode.
"""
from __future__ import annotations

from .actions import (
    ActionLibrary,
    AtomicActionSpec,
    EndpointBinding,
    builtin_library,
    load_library,
    register_action,
    render_library_description,
    save_library,
    validate_behavior_names,
)
from .clocks import SimClock, WallClock
from .dmp import (
    DemonstrationTrajectory,
    MovementModel,
    SkillStore,
    fit,
    parse_demo_csv,
    register_skill,
    rollout,
)
from .engine import (
    ActionRouter,
    ExecutionTrace,
    StepResult,
    compute_return,
    run_behavior,
    run_fsm,
    run_sequence,
    run_tree,
)
from .errors import ParseError, RobochatError
from .gateway import (
    GatewayConfig,
    LlmResponse,
    build_gateway,
    complete,
    corrupt_plan,
    parse_command,
)
from .observe import Observation, ObserverSpec, collect_observation, default_observers
from .parsing import (
    ActionStep,
    Behavior,
    extract_fenced_block,
    parse_response,
    serialize_behavior,
)
from .prompts import Prompt, PromptTemplate, build_prompt, load_template
from .session import (
    EpisodeRecord,
    ScenarioConfig,
    Session,
    SessionConfig,
    SessionService,
)
from .tasks import GoalClause, TaskSpec
from .world import (
    ActionResult,
    PerturbationEvent,
    WorldState,
    execute_atomic,
    goal_satisfied,
    ground_truth_plan,
    perturb,
    reset,
)

__version__ = "0.1.0"

__all__ = [
    "ActionLibrary",
    "ActionResult",
    "ActionRouter",
    "ActionStep",
    "AtomicActionSpec",
    "Behavior",
    "DemonstrationTrajectory",
    "EndpointBinding",
    "EpisodeRecord",
    "ExecutionTrace",
    "GatewayConfig",
    "GoalClause",
    "LlmResponse",
    "MovementModel",
    "Observation",
    "ObserverSpec",
    "ParseError",
    "PerturbationEvent",
    "Prompt",
    "PromptTemplate",
    "RobochatError",
    "ScenarioConfig",
    "Session",
    "SessionConfig",
    "SessionService",
    "SimClock",
    "SkillStore",
    "StepResult",
    "TaskSpec",
    "WallClock",
    "WorldState",
    "builtin_library",
    "build_gateway",
    "build_prompt",
    "collect_observation",
    "complete",
    "compute_return",
    "corrupt_plan",
    "default_observers",
    "execute_atomic",
    "extract_fenced_block",
    "fit",
    "goal_satisfied",
    "ground_truth_plan",
    "load_library",
    "load_template",
    "parse_command",
    "parse_demo_csv",
    "parse_response",
    "perturb",
    "register_action",
    "register_skill",
    "render_library_description",
    "reset",
    "rollout",
    "run_behavior",
    "run_fsm",
    "run_sequence",
    "run_tree",
    "save_library",
    "serialize_behavior",
    "validate_behavior_names",
    "__version__",
]
