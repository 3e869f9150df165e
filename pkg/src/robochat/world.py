"""Deterministic simulated workspace the behaviors execute against.

The model is symbolic: objects sit in named zones, on top of each other,
or in the gripper.  Every atomic action reports an in-band failure flag
(0 success, 1 failure) instead of raising; a failed action leaves the
world unchanged except for the gripper width, which drops to 0 on a
failed grasp.  The supervisory scenario adds a small jog grid on top of
the same state type.

Two rules give the world its teeth:

* occlusion: when a scenario enables it, the camera cannot see past the
  arm, so locate_object fails unless the arm is parked at home;
* located-belief: locate_object records where it saw an object, and
  pick_up reaches for that remembered zone.  If the object was moved in
  between (a perturbation), the grasp closes on air: failure, width 0.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .errors import (
    InvalidBoxCount,
    InvalidLocation,
    ObjectHeld,
    UnknownBuiltin,
    UnknownObject,
    UnknownTask,
)
from .tasks import GoalClause, TaskSpec

ZONES = ("table_center", "table_left", "table_right", "sink", "bowl",
         "cabinet", "machine", "home")
TABLE_ZONES = ("table_center", "table_left", "table_right")
COLORS = ("red", "green", "blue", "orange", "yellow", "purple", "white", "none")
KINDS = ("cube", "mug", "bowl_item", "spoon")

OPEN_WIDTH = 85.0
GRASP_WIDTH = 42.0

Cell = tuple[int, int, int]


@dataclass(frozen=True)
class Location:
    """Tagged union: a zone, on top of another object, or in the gripper."""

    kind: str            # "zone" | "on" | "held"
    ref: str = ""        # zone name or object id

    @staticmethod
    def zone(name: str) -> "Location":
        return Location("zone", name)

    @staticmethod
    def on(object_id: str) -> "Location":
        return Location("on", object_id)

    @staticmethod
    def held() -> "Location":
        return Location("held")


@dataclass(frozen=True)
class SceneObject:
    id: str
    kind: str
    color: str
    location: Location


@dataclass(frozen=True)
class GripperState:
    open: bool = True
    width: float = OPEN_WIDTH
    held: str | None = None


@dataclass
class GridState:
    """Jog workspace for the supervisory scenario."""

    width: int = 5
    depth: int = 5
    height: int = 3
    gripper_cell: Cell = (2, 0, 2)
    object_cells: dict[str, Cell] = field(default_factory=dict)
    obstacle_cells: frozenset[Cell] = frozenset()
    white_area: tuple[int, int] = (4, 4)

    def clone(self) -> "GridState":
        return GridState(
            width=self.width,
            depth=self.depth,
            height=self.height,
            gripper_cell=self.gripper_cell,
            object_cells=dict(self.object_cells),
            obstacle_cells=self.obstacle_cells,
            white_area=self.white_area,
        )

    def in_bounds(self, cell: Cell) -> bool:
        x, y, z = cell
        return 0 <= x < self.width and 0 <= y < self.depth and 0 <= z < self.height


@dataclass
class WorldState:
    scenario: str
    objects: dict[str, SceneObject]
    gripper: GripperState = field(default_factory=GripperState)
    arm_zone: str = "home"
    machine_on: bool = False
    cabinet_door_open: bool = False
    machine_cover_open: bool = False
    step_count: int = 0
    rng_seed: int = 0
    occlusion_active: bool = False
    belief: dict[str, str] = field(default_factory=dict)
    grid: GridState | None = None

    @property
    def world_version(self) -> int:
        return self.step_count

    def clone(self) -> "WorldState":
        return WorldState(
            scenario=self.scenario,
            objects=dict(self.objects),
            gripper=self.gripper,
            arm_zone=self.arm_zone,
            machine_on=self.machine_on,
            cabinet_door_open=self.cabinet_door_open,
            machine_cover_open=self.machine_cover_open,
            step_count=self.step_count,
            rng_seed=self.rng_seed,
            occlusion_active=self.occlusion_active,
            belief=dict(self.belief),
            grid=self.grid.clone() if self.grid else None,
        )

    def to_dict(self) -> dict:
        """Canonical snapshot, stable across runs with the same history."""
        return {
            "scenario": self.scenario,
            "objects": {
                oid: {
                    "kind": o.kind,
                    "color": o.color,
                    "location": [o.location.kind, o.location.ref],
                }
                for oid, o in sorted(self.objects.items())
            },
            "gripper": {
                "open": self.gripper.open,
                "width": self.gripper.width,
                "held": self.gripper.held,
            },
            "arm_zone": self.arm_zone,
            "machine_on": self.machine_on,
            "cabinet_door_open": self.cabinet_door_open,
            "machine_cover_open": self.machine_cover_open,
            "step_count": self.step_count,
            "occlusion_active": self.occlusion_active,
            "belief": dict(sorted(self.belief.items())),
            "grid": None if self.grid is None else {
                "gripper_cell": list(self.grid.gripper_cell),
                "object_cells": {k: list(v) for k, v in sorted(self.grid.object_cells.items())},
                "obstacle_cells": sorted(list(c) for c in self.grid.obstacle_cells),
                "white_area": list(self.grid.white_area),
            },
        }


@dataclass(frozen=True)
class ActionResult:
    name: str
    input: str
    output: str
    failure: int       # 0 success, 1 failure


@dataclass(frozen=True)
class PerturbationEvent:
    """Scheduled scene change: applied just before the step at at_step."""

    at_step: int
    object_id: str
    new_zone: str | None = None
    new_cell: Cell | None = None


# --- scenarios --------------------------------------------------------------

def reset(scenario: str, n_boxes: int = 0, seed: int = 0,
          occlusion: bool = False) -> WorldState:
    """Build the deterministic start state for a scenario.

    tabletop needs n_boxes in 2..8; coffee and supervisory ignore it.
    """
    if scenario == "tabletop":
        return _reset_tabletop(n_boxes, seed, occlusion)
    if scenario == "coffee":
        return _reset_coffee(seed, occlusion)
    if scenario == "supervisory":
        return _reset_supervisory(seed)
    raise UnknownTask(f"unknown scenario {scenario!r}")


def _reset_tabletop(n_boxes: int, seed: int, occlusion: bool) -> WorldState:
    if not 2 <= n_boxes <= 8:
        raise InvalidBoxCount(f"n_boxes must be in 2..8, got {n_boxes}")
    rng = random.Random(seed)
    palette = [c for c in COLORS if c != "none"]
    colors = rng.sample(palette, min(n_boxes, len(palette)))
    if n_boxes > len(palette):
        colors += colors[: n_boxes - len(palette)]
    objects: dict[str, SceneObject] = {}
    for i, color in enumerate(colors):
        oid = f"{color}_cube"
        if oid in objects:
            oid = f"{color}_cube_2"
        zone = rng.choice(TABLE_ZONES)
        objects[oid] = SceneObject(oid, "cube", color, Location.zone(zone))
    return WorldState(scenario="tabletop", objects=objects, rng_seed=seed,
                      occlusion_active=occlusion)


def _reset_coffee(seed: int, occlusion: bool) -> WorldState:
    objects = {
        "mug": SceneObject("mug", "mug", "none", Location.zone("table_center")),
        "spoon": SceneObject("spoon", "spoon", "none", Location.zone("table_right")),
        "bowl": SceneObject("bowl", "bowl_item", "none", Location.zone("cabinet")),
    }
    return WorldState(scenario="coffee", objects=objects, rng_seed=seed,
                      occlusion_active=occlusion)


def _reset_supervisory(seed: int) -> WorldState:
    objects = {
        "blue_cube": SceneObject("blue_cube", "cube", "blue", Location.zone("table_center")),
        "red_cube": SceneObject("red_cube", "cube", "red", Location.zone("table_center")),
        "blue_bowl": SceneObject("blue_bowl", "bowl_item", "blue", Location.zone("table_center")),
    }
    grid = GridState(
        gripper_cell=(2, 0, 2),
        object_cells={
            "blue_cube": (0, 2, 0),
            "red_cube": (4, 2, 0),
            "blue_bowl": (0, 4, 0),
        },
        obstacle_cells=frozenset({(2, 2, 0), (2, 2, 1)}),
        white_area=(4, 4),
    )
    return WorldState(scenario="supervisory", objects=objects, grid=grid,
                      rng_seed=seed)


# --- descriptors ------------------------------------------------------------

_STOPWORDS = {"the", "a", "an", "another", "other", "one", "more", "please", "up"}
_KIND_WORDS = {
    "cube": "cube", "cubes": "cube", "box": "cube", "boxes": "cube", "block": "cube",
    "mug": "mug", "cup": "mug",
    "bowl": "bowl_item",
    "spoon": "spoon",
}


def display_name(obj: SceneObject) -> str:
    if obj.kind == "cube":
        return f"{obj.color} cube"
    base = {"mug": "mug", "bowl_item": "bowl", "spoon": "spoon"}[obj.kind]
    return base if obj.color == "none" else f"{obj.color} {base}"


def resolve_object(state: WorldState, descriptor: str) -> SceneObject | None:
    """Map a free-text descriptor to a scene object, lowest id wins ties.

    A word that is neither a known color nor a known kind makes the
    descriptor unresolvable; asking for a turquoise cube must not grab
    whatever cube happens to be around.
    """
    ident = descriptor.strip().lower().replace(" ", "_")
    if ident in state.objects:
        return state.objects[ident]
    tokens = [t for t in descriptor.lower().replace("_", " ").split()
              if t not in _STOPWORDS]
    color = None
    kind = None
    for t in tokens:
        if t in _KIND_WORDS:
            kind = _KIND_WORDS[t]
        elif t in COLORS and t != "none":
            color = t
        else:
            return None
    if kind is None and color is None:
        return None
    matches = [
        o for o in state.objects.values()
        if (kind is None or o.kind == kind) and (color is None or o.color == color)
    ]
    if not matches:
        return None
    return min(matches, key=lambda o: o.id)


def normalize_zone(text: str) -> str | None:
    token = "_".join(t for t in text.lower().replace("_", " ").split()
                     if t not in _STOPWORDS)
    return token if token in ZONES else None


def effective_zone(state: WorldState, obj: SceneObject) -> str | None:
    """Zone of the stack the object belongs to; None while held."""
    seen = set()
    cur = obj
    while cur.location.kind == "on":
        if cur.id in seen:  # defensive, stacks are acyclic by construction
            return None
        seen.add(cur.id)
        cur = state.objects[cur.location.ref]
    if cur.location.kind == "zone":
        return cur.location.ref
    return None


def _covered(state: WorldState, obj: SceneObject) -> bool:
    return any(o.location.kind == "on" and o.location.ref == obj.id
               for o in state.objects.values())


def _in_closed_cabinet(state: WorldState, obj: SceneObject) -> bool:
    return effective_zone(state, obj) == "cabinet" and not state.cabinet_door_open


def _set(state: WorldState, obj: SceneObject, **changes) -> None:
    state.objects[obj.id] = replace(obj, **changes)


# --- builtins ---------------------------------------------------------------

def _h_home_arm(w: WorldState, arg: str):
    w.arm_zone = "home"
    return "arm homed", 0


def _h_locate_object(w: WorldState, arg: str):
    if w.occlusion_active and w.arm_zone != "home":
        return "camera occluded by arm", 1
    obj = resolve_object(w, arg)
    if obj is None:
        return f"no {arg.strip() or 'object'} in view", 1
    if obj.location.kind == "held":
        return f"found {display_name(obj)} in the gripper", 0
    if _in_closed_cabinet(w, obj):
        return f"no {arg.strip()} in view", 1
    zone = effective_zone(w, obj)
    w.belief[obj.id] = zone
    return f"found {display_name(obj)} in {zone}", 0


def _grasp_fail(w: WorldState, msg: str):
    # zero width signals a failed grasp, but never while something is held
    if w.gripper.held is None:
        w.gripper = replace(w.gripper, width=0.0)
    return msg, 1


def _h_pick_up(w: WorldState, arg: str):
    if w.gripper.held is not None:
        return _grasp_fail(w, "failed to grasp: gripper is full")
    obj = resolve_object(w, arg)
    if obj is None:
        return _grasp_fail(w, f"failed to grasp {arg.strip() or 'object'}: nothing matches")
    if _covered(w, obj):
        return _grasp_fail(w, f"failed to grasp {display_name(obj)}: something is on top")
    if _in_closed_cabinet(w, obj):
        return _grasp_fail(w, f"failed to grasp {display_name(obj)}: cabinet door is closed")
    if w.grid is not None:
        cell = w.grid.object_cells[obj.id]
        w.grid.gripper_cell = cell
    else:
        zone = effective_zone(w, obj)
        believed = w.belief.get(obj.id)
        if believed is not None and believed != zone:
            # the arm reaches the remembered zone and closes on air
            return _grasp_fail(w, f"failed to grasp {display_name(obj)}: it moved since last seen")
        w.arm_zone = zone
    _set(w, obj, location=Location.held())
    w.belief.pop(obj.id, None)
    w.gripper = GripperState(open=False, width=GRASP_WIDTH, held=obj.id)
    return f"picked {display_name(obj)}", 0


def _release_grid(w: WorldState, obj: SceneObject) -> None:
    x, y, _ = w.grid.gripper_cell
    landing = (x, y, 0)
    others = [o for oid, o in w.objects.items()
              if oid != obj.id and w.grid.object_cells.get(oid) == landing
              and o.location.kind != "held" and not _covered(w, o)]
    w.grid.object_cells[obj.id] = landing
    if others:
        _set(w, obj, location=Location.on(min(others, key=lambda o: o.id).id))
    else:
        _set(w, obj, location=Location.zone("table_center"))


def _h_place_on(w: WorldState, arg: str):
    held = w.gripper.held
    if held is None:
        return "nothing is held", 1
    target = resolve_object(w, arg)
    if target is None:
        return f"cannot place on {arg.strip() or 'object'}: nothing matches", 1
    if target.id == held or target.location.kind == "held":
        return f"cannot place on {display_name(target)}: it is in the gripper", 1
    if _covered(w, target):
        return f"cannot place on {display_name(target)}: it is covered", 1
    if _in_closed_cabinet(w, target):
        return f"cannot place on {display_name(target)}: cabinet door is closed", 1
    obj = w.objects[held]
    if w.grid is not None:
        w.grid.gripper_cell = w.grid.object_cells[target.id]
        w.grid.object_cells[held] = w.grid.gripper_cell
    else:
        w.arm_zone = effective_zone(w, target)
    _set(w, obj, location=Location.on(target.id))
    w.belief.pop(held, None)
    w.gripper = GripperState(open=True, width=OPEN_WIDTH, held=None)
    return f"placed {display_name(obj)} on {display_name(target)}", 0


def _h_place_in(w: WorldState, arg: str):
    held = w.gripper.held
    if held is None:
        return "nothing is held", 1
    zone = normalize_zone(arg)
    if zone is None:
        return f"cannot place in {arg.strip() or 'zone'}: unknown zone", 1
    if zone == "cabinet" and not w.cabinet_door_open:
        return "cannot place in cabinet: cabinet door is closed", 1
    if zone == "machine":
        return "the machine only accepts a mug via insert_mug", 1
    obj = w.objects[held]
    _set(w, obj, location=Location.zone(zone))
    w.belief.pop(held, None)
    w.arm_zone = zone
    w.gripper = GripperState(open=True, width=OPEN_WIDTH, held=None)
    return f"placed {display_name(obj)} in {zone}", 0


def _h_drop_in_sink(w: WorldState, arg: str):
    held = w.gripper.held
    if held is None:
        return "nothing to drop", 1
    obj = w.objects[held]
    _set(w, obj, location=Location.zone("sink"))
    w.belief.pop(held, None)
    w.arm_zone = "sink"
    w.gripper = GripperState(open=True, width=OPEN_WIDTH, held=None)
    return f"dropped {display_name(obj)} in sink", 0


def _h_open_gripper(w: WorldState, arg: str):
    held = w.gripper.held
    if held is not None:
        obj = w.objects[held]
        if w.grid is not None:
            _release_grid(w, obj)
        else:
            _set(w, obj, location=Location.zone(w.arm_zone))
    w.gripper = GripperState(open=True, width=OPEN_WIDTH, held=None)
    return f"gripper open, width {OPEN_WIDTH:g}", 0


def _h_close_gripper(w: WorldState, arg: str):
    if w.gripper.held is not None:
        return f"gripper closed, width {GRASP_WIDTH:g}", 0
    if w.grid is not None:
        at_cell = [o for oid, o in w.objects.items()
                   if w.grid.object_cells.get(oid) == w.grid.gripper_cell
                   and o.location.kind != "held"]
        uncovered = [o for o in at_cell if not _covered(w, o)]
        if uncovered:
            obj = min(uncovered, key=lambda o: o.id)
            _set(w, obj, location=Location.held())
            w.gripper = GripperState(open=False, width=GRASP_WIDTH, held=obj.id)
            return f"gripper closed on {display_name(obj)}, width {GRASP_WIDTH:g}", 0
    w.gripper = replace(w.gripper, open=False, width=0.0)
    return "gripper closed on nothing, width 0", 1


def _toggle(attr: str, value: bool, zone: str, output: str):
    def handler(w: WorldState, arg: str):
        setattr(w, attr, value)
        w.arm_zone = zone
        return output, 0
    return handler


def _h_take_out_of_cabinet(w: WorldState, arg: str):
    if not w.cabinet_door_open:
        return "cabinet door is closed", 1
    obj = resolve_object(w, arg)
    if obj is None:
        return f"no {arg.strip() or 'object'} in the cabinet", 1
    if effective_zone(w, obj) != "cabinet":
        return f"{display_name(obj)} is not in the cabinet", 1
    if _covered(w, obj):
        return f"cannot move {display_name(obj)}: something is on top", 1
    _set(w, obj, location=Location.zone("table_center"))
    w.belief.pop(obj.id, None)
    w.arm_zone = "table_center"
    return f"took {display_name(obj)} out of the cabinet", 0


def _h_put_in_cabinet(w: WorldState, arg: str):
    if not w.cabinet_door_open:
        return "cabinet door is closed", 1
    obj = resolve_object(w, arg)
    if obj is None:
        return f"cannot find {arg.strip() or 'object'}", 1
    if obj.location.kind == "held":
        w.gripper = GripperState(open=True, width=OPEN_WIDTH, held=None)
    elif _covered(w, obj):
        return f"cannot move {display_name(obj)}: something is on top", 1
    _set(w, obj, location=Location.zone("cabinet"))
    w.belief.pop(obj.id, None)
    w.arm_zone = "cabinet"
    return f"put {display_name(obj)} in the cabinet", 0


def _h_insert_mug(w: WorldState, arg: str):
    held = w.gripper.held
    if held is None:
        return "no mug in hand", 1
    obj = w.objects[held]
    if obj.kind != "mug":
        return "held object is not a mug", 1
    _set(w, obj, location=Location.zone("machine"))
    w.belief.pop(held, None)
    w.arm_zone = "machine"
    w.gripper = GripperState(open=True, width=OPEN_WIDTH, held=None)
    return "mug inserted in machine", 0


def _h_scoop_from_bowl(w: WorldState, arg: str):
    held = w.gripper.held
    if held is None or w.objects[held].kind != "spoon":
        return "cannot scoop: spoon not in hand", 1
    bowls = [o for o in w.objects.values() if o.kind == "bowl_item"]
    if not bowls:
        return "cannot scoop: no bowl in reach", 1
    bowl = bowls[0]
    if _in_closed_cabinet(w, bowl):
        return "cannot scoop: the bowl is in the closed cabinet", 1
    w.arm_zone = effective_zone(w, bowl) or w.arm_zone
    return "scooped coffee grounds", 0


def _h_pour_into_machine(w: WorldState, arg: str):
    held = w.gripper.held
    if held is None or w.objects[held].kind != "spoon":
        return "cannot pour: spoon not in hand", 1
    if not w.machine_cover_open:
        return "cannot pour: machine cover is closed", 1
    w.arm_zone = "machine"
    return "poured coffee grounds into machine", 0


_JOGS = {
    "move_left": (-1, 0, 0),
    "move_right": (1, 0, 0),
    "move_forward": (0, 1, 0),
    "move_backward": (0, -1, 0),
    "move_up": (0, 0, 1),
    "move_down": (0, 0, -1),
}


def _jog(name: str):
    dx, dy, dz = _JOGS[name]
    word = name.removeprefix("move_")

    def handler(w: WorldState, arg: str):
        if w.grid is None:
            return "jogging not available in this scenario", 1
        x, y, z = w.grid.gripper_cell
        target = (x + dx, y + dy, z + dz)
        if not w.grid.in_bounds(target):
            return "workspace limit reached", 1
        if target in w.grid.obstacle_cells:
            return "blocked by obstacle", 1
        w.grid.gripper_cell = target
        if w.gripper.held is not None:
            w.grid.object_cells[w.gripper.held] = target
        return f"moved {word} to ({target[0]}, {target[1]}, {target[2]})", 0

    return handler


BUILTINS = {
    "home_arm": _h_home_arm,
    "locate_object": _h_locate_object,
    "pick_up": _h_pick_up,
    "place_on": _h_place_on,
    "place_in": _h_place_in,
    "drop_in_sink": _h_drop_in_sink,
    "open_gripper": _h_open_gripper,
    "close_gripper": _h_close_gripper,
    "open_door": _toggle("cabinet_door_open", True, "cabinet", "cabinet door open"),
    "close_door": _toggle("cabinet_door_open", False, "cabinet", "cabinet door closed"),
    "open_cover": _toggle("machine_cover_open", True, "machine", "machine cover open"),
    "close_cover": _toggle("machine_cover_open", False, "machine", "machine cover closed"),
    "switch_on": _toggle("machine_on", True, "machine", "machine on"),
    "switch_off": _toggle("machine_on", False, "machine", "machine off"),
    "take_out_of_cabinet": _h_take_out_of_cabinet,
    "put_in_cabinet": _h_put_in_cabinet,
    "insert_mug": _h_insert_mug,
    "scoop_from_bowl": _h_scoop_from_bowl,
    "pour_into_machine": _h_pour_into_machine,
    **{name: _jog(name) for name in _JOGS},
}


def execute_atomic(state: WorldState, name: str, input_text: str = "",
                   prev_output: str = "") -> tuple[WorldState, ActionResult]:
    """Run one builtin and return (next state, result).

    The input state is never mutated.  Unknown names raise; everything
    an action can get wrong in the world comes back as failure=1.
    """
    if name not in BUILTINS:
        raise UnknownBuiltin(name)
    nxt = state.clone()
    output, failure = BUILTINS[name](nxt, input_text)
    if failure:
        # roll back everything but the gripper width (failed-grasp signal)
        width = nxt.gripper.width
        nxt = state.clone()
        nxt.gripper = replace(nxt.gripper, width=width)
    nxt.step_count += 1
    return nxt, ActionResult(name=name, input=input_text, output=output,
                             failure=failure)


def perturb(state: WorldState, object_id: str, new_zone: str | None = None,
            new_cell: Cell | None = None) -> WorldState:
    """Move an object out from under the robot; beliefs go stale on purpose."""
    if object_id not in state.objects:
        raise UnknownObject(object_id)
    obj = state.objects[object_id]
    if obj.location.kind == "held":
        raise ObjectHeld(object_id)
    nxt = state.clone()
    if nxt.grid is not None:
        if new_cell is None or not nxt.grid.in_bounds(new_cell) \
                or new_cell in nxt.grid.obstacle_cells:
            raise InvalidLocation(f"bad cell {new_cell!r}")
        nxt.grid.object_cells[object_id] = new_cell
        _set(nxt, obj, location=Location.zone("table_center"))
    else:
        if new_zone not in ZONES:
            raise InvalidLocation(f"bad zone {new_zone!r}")
        _set(nxt, obj, location=Location.zone(new_zone))
    nxt.step_count += 1
    return nxt


def apply_perturbation(state: WorldState, event: PerturbationEvent) -> WorldState:
    return perturb(state, event.object_id, new_zone=event.new_zone,
                   new_cell=event.new_cell)


# --- goals ------------------------------------------------------------------

def goal_satisfied(state: WorldState, task: TaskSpec) -> bool:
    return all(_clause_holds(state, g) for g in task.goals)


def _clause_holds(state: WorldState, clause: GoalClause) -> bool:
    subject = resolve_object(state, clause.subject)
    if subject is None or subject.location.kind == "held":
        return False
    if clause.kind == "in_zone":
        return effective_zone(state, subject) == clause.target
    if clause.kind == "on":
        target = resolve_object(state, clause.target)
        if target is None:
            return False
        if subject.location.kind == "on" and subject.location.ref == target.id:
            return True
        if state.grid is not None:
            return (state.grid.object_cells.get(subject.id)
                    == state.grid.object_cells.get(target.id))
        return False
    return False


# --- ground-truth planning --------------------------------------------------

COFFEE_PLAN: list[tuple[str, str]] = [
    ("pick_up", "mug"),
    ("insert_mug", "mug"),
    ("open_cover", ""),
    ("open_door", ""),
    ("take_out_of_cabinet", "bowl"),
    ("pick_up", "spoon"),
    ("scoop_from_bowl", ""),
    ("pour_into_machine", ""),
    ("close_cover", ""),
    ("put_in_cabinet", "bowl"),
    ("close_door", ""),
    ("switch_on", ""),
]


def ground_truth_plan(state: WorldState, task: TaskSpec | None = None,
                      guarded: bool = False) -> list[tuple[str, str]]:
    """Shortest clean plan for the scenario and task.

    guarded adds a second locate_object right before every grasp, the
    recovery behavior corrective feedback asks for after a mid-reach
    perturbation.
    """
    if state.scenario == "coffee":
        return list(COFFEE_PLAN)
    if state.scenario == "supervisory":
        if task is None or not task.goals:
            raise UnknownTask("supervisory planning needs an on(...) goal")
        return jog_route(state, task)
    if task is None:
        raise UnknownTask("tabletop planning needs a task")
    plan: list[tuple[str, str]] = []
    for clause in _ordered_clauses(task):
        subject = resolve_object(state, clause.subject)
        if subject is None:
            raise UnknownTask(f"no object matches {clause.subject!r}")
        steps = [("locate_object", clause.subject)]
        if guarded:
            steps.append(("locate_object", clause.subject))
        steps.append(("pick_up", clause.subject))
        if clause.kind == "on":
            if resolve_object(state, clause.target) is None:
                raise UnknownTask(f"no object matches {clause.target!r}")
            steps.append(("place_on", clause.target))
        elif clause.target == "sink":
            steps.append(("drop_in_sink", ""))
        else:
            steps.append(("place_in", clause.target))
        plan.extend(steps)
    return plan


def _ordered_clauses(task: TaskSpec) -> list[GoalClause]:
    """Stacking chains bottom-up, everything else in given order."""
    ons = [g for g in task.goals if g.kind == "on"]
    rest = [g for g in task.goals if g.kind != "on"]
    ordered: list[GoalClause] = []
    remaining = list(ons)
    while remaining:
        for clause in remaining:
            if not any(other.subject == clause.target for other in remaining):
                ordered.append(clause)
                remaining.remove(clause)
                break
        else:
            # cycle in the goal graph, fall back to given order
            ordered.extend(remaining)
            break
    return rest + ordered


def jog_route(state: WorldState, task: TaskSpec) -> list[tuple[str, str]]:
    """Deterministic jog sequence for one on(subject, target) grid goal.

    Travel happens at the top layer, above any obstacle.
    """
    grid = state.grid
    if grid is None:
        raise UnknownTask("jog routes need the supervisory grid")
    clause = task.goals[0]
    subject = resolve_object(state, clause.subject)
    target = resolve_object(state, clause.target)
    if subject is None or target is None:
        raise UnknownTask(f"cannot resolve {clause.subject!r} / {clause.target!r}")
    route: list[tuple[str, str]] = []
    x, y, z = grid.gripper_cell

    def climb_to(zz: int):
        nonlocal z
        while z < zz:
            route.append(("move_up", ""))
            z += 1
        while z > zz:
            route.append(("move_down", ""))
            z -= 1

    def travel_to(tx: int, ty: int):
        nonlocal x, y
        while x < tx:
            route.append(("move_right", ""))
            x += 1
        while x > tx:
            route.append(("move_left", ""))
            x -= 1
        while y < ty:
            route.append(("move_forward", ""))
            y += 1
        while y > ty:
            route.append(("move_backward", ""))
            y -= 1

    sx, sy, sz = grid.object_cells[subject.id]
    tx, ty, tz = grid.object_cells[target.id]
    climb_to(grid.height - 1)
    travel_to(sx, sy)
    climb_to(sz)
    route.append(("close_gripper", ""))
    climb_to(grid.height - 1)
    travel_to(tx, ty)
    climb_to(tz)
    route.append(("open_gripper", ""))
    return route
