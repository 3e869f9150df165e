"""Turns world state into the deterministic text block prompts embed.

Observers are small named views; an observation is their lines in
registration order.  Collection never mutates the world, and the same
state always renders to the same bytes.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DuplicateObserver, EmptyConfig
from .world import WorldState, display_name, effective_zone

OBSERVER_KINDS = ("gripper", "objects", "doors_machine", "arm", "custom_template")


@dataclass(frozen=True)
class ObserverSpec:
    name: str
    kind: str
    template: str = ""

    def __post_init__(self):
        if self.kind not in OBSERVER_KINDS:
            raise EmptyConfig(f"unknown observer kind {self.kind!r}")


@dataclass(frozen=True)
class Observation:
    lines: tuple[str, ...]
    world_version: int

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


def register_observer(observers: list[ObserverSpec], spec: ObserverSpec) -> list[ObserverSpec]:
    if any(o.name == spec.name for o in observers):
        raise DuplicateObserver(spec.name)
    observers.append(spec)
    return observers


def default_observers(scenario: str) -> list[ObserverSpec]:
    specs = [
        ObserverSpec("gripper", "gripper"),
        ObserverSpec("objects", "objects"),
    ]
    if scenario == "coffee":
        specs.append(ObserverSpec("doors_machine", "doors_machine"))
    specs.append(ObserverSpec("arm", "arm"))
    return specs


def collect_observation(state: WorldState, observers: list[ObserverSpec]) -> Observation:
    if not observers:
        raise EmptyConfig("no observers registered")
    lines: list[str] = []
    for spec in observers:
        try:
            lines.extend(_render(state, spec))
        except Exception:
            lines.append(f"{spec.name}: unavailable")
    return Observation(lines=tuple(lines), world_version=state.world_version)


def _render(state: WorldState, spec: ObserverSpec) -> list[str]:
    if spec.kind == "gripper":
        return [_gripper_line(state)]
    if spec.kind == "objects":
        return _object_lines(state)
    if spec.kind == "doors_machine":
        return [
            f"the cabinet door is {'open' if state.cabinet_door_open else 'closed'}",
            f"the machine cover is {'open' if state.machine_cover_open else 'closed'}",
            f"the machine is {'on' if state.machine_on else 'off'}",
        ]
    if spec.kind == "arm":
        return [f"the arm is at {state.arm_zone}"]
    # custom_template
    return [spec.template.format(**_template_context(state))]


def _gripper_line(state: WorldState) -> str:
    g = state.gripper
    line = "the gripper is open" if g.open else "the gripper is closed"
    if g.held is not None:
        line += f" holding the {display_name(state.objects[g.held])}"
    if state.grid is not None:
        x, y, z = state.grid.gripper_cell
        line += f" at ({x}, {y}, {z})"
    return line


def _object_lines(state: WorldState) -> list[str]:
    lines = []
    for obj in state.objects.values():
        if obj.location.kind == "held":
            continue  # the gripper line covers it
        name = display_name(obj)
        if state.grid is not None:
            x, y, z = state.grid.object_cells[obj.id]
            if obj.location.kind == "on":
                base = display_name(state.objects[obj.location.ref])
                lines.append(f"the {name} is on the {base} at ({x}, {y}, {z})")
            else:
                lines.append(f"the {name} is at ({x}, {y}, {z})")
        elif obj.location.kind == "on":
            base = display_name(state.objects[obj.location.ref])
            lines.append(f"the {name} is on the {base}")
        else:
            lines.append(f"the {name} is in {obj.location.ref}")
    return lines


def _template_context(state: WorldState) -> dict:
    from .world import ZONES

    ctx: dict[str, object] = {f"{z}_count": 0 for z in ZONES}
    for obj in state.objects.values():
        zone = effective_zone(state, obj)
        if zone is not None:
            ctx[f"{zone}_count"] = int(ctx[f"{zone}_count"]) + 1
    held = state.gripper.held
    ctx["held"] = display_name(state.objects[held]) if held else "nothing"
    ctx["arm_zone"] = state.arm_zone
    ctx["n_objects"] = len(state.objects)
    ctx["step_count"] = state.step_count
    return ctx
