from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from robochat.clocks import SimClock
from robochat.gateway import GatewayConfig
from robochat.session import ScenarioConfig, SessionConfig, SessionService
from robochat.tasks import GoalClause, TaskSpec


@pytest.fixture
def sim_service(tmp_path):
    return SessionService(store_dir=str(tmp_path / "sessions"), clock=SimClock())


@pytest.fixture
def red_sink_task():
    # seed 42 scene holds purple, red, white cubes
    return TaskSpec(
        id="red_sink", n_boxes=3, instruction="put the red cube in the sink",
        goals=(GoalClause("in_zone", "red cube", "sink"),), seed=42)


def tabletop_config(task, backend="oracle", **gw):
    return SessionConfig(
        scenario=ScenarioConfig(kind="tabletop", n_boxes=task.n_boxes,
                                seed=task.seed),
        gateway=GatewayConfig(backend=backend, **gw),
        task_spec=task)
