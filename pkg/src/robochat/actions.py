"""Registry of atomic actions the robot can execute.

Each entry pairs a prompt-facing description with an endpoint binding that
tells the engine how to run the action: a builtin of the simulated world,
an HTTP bridge to an external executor, or a learned movement skill.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DuplicateName, MalformedFile, MissingField, UnknownEndpointType

NAME_RE = re.compile(r"^[a-z0-9_]+$")

ACTION_TYPES = ("action", "service", "code")
ENDPOINT_KINDS = ("sim_builtin", "http_bridge", "dmp_skill")


@dataclass(frozen=True)
class EndpointBinding:
    """How an action is actually executed."""

    kind: str                  # sim_builtin | http_bridge | dmp_skill
    target: str                # builtin id, URL, or skill id
    timeout_s: float = 10.0

    def __post_init__(self):
        if self.kind not in ENDPOINT_KINDS:
            raise UnknownEndpointType(f"endpoint kind {self.kind!r}")


@dataclass(frozen=True)
class AtomicActionSpec:
    name: str
    type: str                  # builtin | learned | external
    description: str
    endpoint: EndpointBinding

    def __post_init__(self):
        if not NAME_RE.match(self.name):
            raise MalformedFile(f"action name {self.name!r} must match [a-z0-9_]+")
        if self.type not in ACTION_TYPES:
            raise MalformedFile(f"action type {self.type!r}")
        if not self.description:
            raise MissingField("description", self.name)


class ActionLibrary:
    """Ordered, name-keyed collection of atomic actions."""

    def __init__(self, specs: Iterable[AtomicActionSpec] = ()):
        self._by_name: dict[str, AtomicActionSpec] = {}
        for spec in specs:
            self.add(spec)

    def add(self, spec: AtomicActionSpec) -> None:
        if spec.name in self._by_name:
            raise DuplicateName(spec.name)
        self._by_name[spec.name] = spec

    def get(self, name: str) -> AtomicActionSpec:
        return self._by_name[name]

    def names(self) -> list[str]:
        return list(self._by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)

    def __iter__(self) -> Iterator[AtomicActionSpec]:
        return iter(self._by_name.values())


def _spec_from_dict(entry: dict, index: int) -> AtomicActionSpec:
    if not isinstance(entry, dict):
        raise MalformedFile(f"entry {index} is not an object")
    where = f"entry {index}"
    for key in ("name", "type", "description"):
        if key not in entry:
            raise MissingField(key, where)
    ep = entry.get("endpoint")
    if ep is None:
        # bare name/type/description rows bind to the built-in simulator
        binding = EndpointBinding(kind="sim_builtin", target=str(entry["name"]))
    else:
        if not isinstance(ep, dict):
            raise MalformedFile(f"{where}: endpoint is not an object")
        for key in ("kind", "target"):
            if key not in ep:
                raise MissingField(f"endpoint.{key}", where)
        binding = EndpointBinding(
            kind=ep["kind"],
            target=ep["target"],
            timeout_s=float(ep.get("timeout_s", 10.0)),
        )
    return AtomicActionSpec(
        name=entry["name"],
        type=entry["type"],
        description=entry["description"],
        endpoint=binding,
    )


def load_library(source: str | Path | list) -> ActionLibrary:
    """Load a library from a JSON file path or an already-decoded list."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise MalformedFile(str(exc)) from exc
    else:
        raw = source
    if not isinstance(raw, list):
        raise MalformedFile("library file must hold a JSON list")
    lib = ActionLibrary()
    for i, entry in enumerate(raw):
        lib.add(_spec_from_dict(entry, i))
    return lib


def save_library(lib: ActionLibrary, path: str | Path) -> None:
    entries = [
        {
            "name": s.name,
            "type": s.type,
            "description": s.description,
            "endpoint": {
                "kind": s.endpoint.kind,
                "target": s.endpoint.target,
                "timeout_s": s.endpoint.timeout_s,
            },
        }
        for s in lib
    ]
    Path(path).write_text(json.dumps(entries, indent=2) + "\n")


def render_library_description(lib: ActionLibrary) -> str:
    """One newline-terminated line per action, embedded verbatim in prompts."""
    return "".join(f"- {s.name} ({s.type}): {s.description}\n" for s in lib)


def register_action(lib: ActionLibrary, spec: AtomicActionSpec | dict) -> ActionLibrary:
    if isinstance(spec, dict):
        spec = _spec_from_dict(spec, len(lib))
    lib.add(spec)
    return lib


def validate_behavior_names(behavior, lib: ActionLibrary) -> list[str]:
    """Unknown action names, in first-appearance order; empty means valid.

    Accepts anything with an action_names() method or a plain iterable
    of names.
    """
    names = behavior.action_names() if hasattr(behavior, "action_names") else list(behavior)
    unknown: list[str] = []
    for name in names:
        if name not in lib and name not in unknown:
            unknown.append(name)
    return unknown


def _motion(name: str, description: str) -> AtomicActionSpec:
    # long-running arm motions, the request/feedback/result kind
    return AtomicActionSpec(
        name=name, type="action", description=description,
        endpoint=EndpointBinding(kind="sim_builtin", target=name))


def _service(name: str, description: str) -> AtomicActionSpec:
    # instantaneous request/reply device calls
    return AtomicActionSpec(
        name=name, type="service", description=description,
        endpoint=EndpointBinding(kind="sim_builtin", target=name))


def builtin_library() -> ActionLibrary:
    """The stock action set every scenario starts from."""
    return ActionLibrary([
        _motion("home_arm", "move the arm to its home pose, clearing the camera view"),
        _service("locate_object", "look for the described object and record where it is"),
        _motion("pick_up", "grasp the described object; a zero gripper width means the grasp failed"),
        _motion("place_on", "put the held object on top of the described object"),
        _motion("place_in", "put the held object into the named zone"),
        _motion("drop_in_sink", "drop the held object into the sink"),
        _service("open_gripper", "open the gripper, releasing anything held"),
        _service("close_gripper", "close the gripper, grasping whatever sits under it"),
        _motion("open_door", "open the cabinet door"),
        _motion("close_door", "close the cabinet door"),
        _motion("open_cover", "open the machine cover"),
        _motion("close_cover", "close the machine cover"),
        _service("switch_on", "switch the machine on"),
        _service("switch_off", "switch the machine off"),
        _motion("take_out_of_cabinet", "move the described object from the cabinet to the table"),
        _motion("put_in_cabinet", "move the described object into the cabinet"),
        _motion("insert_mug", "mount the held mug in the machine"),
        _motion("scoop_from_bowl", "scoop coffee grounds from the bowl with the held spoon"),
        _motion("pour_into_machine", "pour the scooped grounds into the open machine"),
        _motion("move_left", "jog the gripper one cell left"),
        _motion("move_right", "jog the gripper one cell right"),
        _motion("move_up", "jog the gripper one cell up"),
        _motion("move_down", "jog the gripper one cell down"),
        _motion("move_forward", "jog the gripper one cell forward"),
        _motion("move_backward", "jog the gripper one cell backward"),
    ])
