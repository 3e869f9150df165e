"""Extracting and validating executable behaviors from model replies.

A reply is prose plus fenced code blocks.  The first well-formed block
whose tag is python, json, or xml is the candidate behavior: json holds
either an action sequence or a state machine, xml holds a behavior
tree, python holds a straight-line call script that is translated into
a sequence.  Serializers regenerate canonical payloads so behaviors
round-trip structurally through text.
"""
from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import (
    ArityError,
    DanglingTransition,
    NoFence,
    NoSuccessTerminal,
    SchemaError,
    UnknownElement,
    UnsupportedConstruct,
    UnterminatedFence,
    XmlError,
)

SUPPORTED_TAGS = ("python", "json", "xml")
MODES = ("sequence", "tree", "fsm", "script")

_OPEN_RE = re.compile(r"^```(\w+)\s*$")
_CLOSE_RE = re.compile(r"^```\s*$")


@dataclass(frozen=True)
class FencedBlock:
    tag: str
    payload: str
    start: int      # offset of the first payload byte in the source text
    end: int        # offset one past the last payload byte


def extract_fenced_block(text: str) -> FencedBlock:
    """First well-formed fenced block with a supported tag.

    Fences must open and close at line starts; the payload is returned
    byte-exact.  Blocks with unsupported tags are treated as prose.
    """
    pos = 0
    inside: str | None = None
    payload_start = 0
    saw_opening = False
    for line in text.splitlines(keepends=True):
        stripped = line.rstrip("\r\n")
        if inside is None:
            m = _OPEN_RE.match(stripped)
            if m and m.group(1) in SUPPORTED_TAGS:
                inside = m.group(1)
                saw_opening = True
                payload_start = pos + len(line)
        elif _CLOSE_RE.match(stripped):
            return FencedBlock(tag=inside, payload=text[payload_start:pos],
                               start=payload_start, end=pos)
        pos += len(line)
    if saw_opening:
        raise UnterminatedFence("fenced block never closed")
    raise NoFence("no fenced code block with a supported tag")


def fenced(tag: str, payload: str) -> str:
    return f"```{tag}\n{payload}\n```"


# --- behavior model ---------------------------------------------------------

@dataclass(frozen=True)
class ActionStep:
    name: str
    input: str = ""


@dataclass(frozen=True)
class TreeNode:
    kind: str                                    # sequence fallback parallel
    name: str = ""                               # inverter retry action condition
    input: str = ""
    threshold: int = 0
    num: int = 0
    children: tuple["TreeNode", ...] = ()


@dataclass(frozen=True)
class FsmStateDef:
    action: str
    input: str
    on_success: str
    on_failure: str


@dataclass(frozen=True)
class FsmGraph:
    initial: str
    states: tuple[tuple[str, FsmStateDef], ...]   # insertion-ordered
    terminals: tuple[tuple[str, str], ...]        # id -> "success" | "failure"

    def state_map(self) -> dict[str, FsmStateDef]:
        return dict(self.states)

    def terminal_map(self) -> dict[str, str]:
        return dict(self.terminals)


@dataclass(frozen=True)
class Behavior:
    mode: str                                    # sequence | tree | fsm
    steps: tuple[ActionStep, ...] = ()
    root: TreeNode | None = None
    fsm: FsmGraph | None = None
    source_tag: str = field(default="", compare=False)

    def action_names(self) -> list[str]:
        if self.mode == "sequence":
            return [s.name for s in self.steps]
        if self.mode == "tree":
            names: list[str] = []

            def walk(node: TreeNode):
                if node.kind in ("action", "condition"):
                    names.append(node.name)
                for child in node.children:
                    walk(child)

            walk(self.root)
            return names
        return [d.action for _, d in self.fsm.states]


# --- grammar: action sequence ----------------------------------------------

def parse_sequence(payload: str) -> Behavior:
    data = _load_json(payload)
    if not isinstance(data, dict):
        raise SchemaError("/", "expected a JSON object")
    if "actions" not in data:
        raise SchemaError("/actions", "missing")
    actions = data["actions"]
    if not isinstance(actions, list):
        raise SchemaError("/actions", "expected a list")
    steps = []
    for i, item in enumerate(actions):
        steps.append(_step_from(item, f"/actions/{i}"))
    return Behavior(mode="sequence", steps=tuple(steps), source_tag="json")


def _load_json(payload: str):
    try:
        return json.loads(payload)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid json: {exc}") from exc


_NAME_RE = re.compile(r"^[a-z0-9_]+$")


def _check_name(name, path: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise SchemaError(path, "action names are lowercase words with underscores")
    return name


def _step_from(item, path: str) -> ActionStep:
    if not isinstance(item, dict):
        raise SchemaError(path, "expected an object")
    if "name" not in item:
        raise SchemaError(f"{path}/name", "missing")
    name = _check_name(item["name"], f"{path}/name")
    arg = item.get("input", "")
    if not isinstance(arg, str):
        raise SchemaError(f"{path}/input", "expected a string")
    return ActionStep(name=name, input=arg)


def serialize_sequence(steps: tuple[ActionStep, ...] | list[ActionStep]) -> str:
    return json.dumps(
        {"actions": [{"name": s.name, "input": s.input} for s in steps]},
        indent=2,
    )


# --- grammar: behavior tree -------------------------------------------------

_COMPOSITES = {"Sequence": "sequence", "Fallback": "fallback", "Parallel": "parallel"}
_DECORATORS = {"Inverter": "inverter", "Retry": "retry"}
_LEAVES = {"Action": "action", "Condition": "condition"}


def parse_tree(payload: str) -> Behavior:
    try:
        root_el = ET.fromstring(payload)
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else 0
        raise XmlError(line, str(exc)) from exc
    if root_el.tag != "BehaviorTree":
        raise UnknownElement(root_el.tag)
    children = list(root_el)
    if len(children) != 1:
        raise ArityError(f"BehaviorTree needs exactly one child, got {len(children)}")
    return Behavior(mode="tree", root=_node_from(children[0], "/BehaviorTree/0"),
                    source_tag="xml")


def _node_from(el: ET.Element, path: str) -> TreeNode:
    tag = el.tag
    kids = list(el)
    if tag in _LEAVES:
        if kids:
            raise ArityError(f"{path}: <{tag}> takes no children")
        name = el.get("name")
        if not name:
            raise SchemaError(path, f"<{tag}> missing attribute name")
        _check_name(name, path)
        return TreeNode(kind=_LEAVES[tag], name=name, input=el.get("input", ""))
    if tag in _DECORATORS:
        if len(kids) != 1:
            raise ArityError(f"{path}: <{tag}> needs exactly one child, got {len(kids)}")
        child = _node_from(kids[0], f"{path}/0")
        if tag == "Retry":
            num = _int_attr(el, "num", path)
            if num < 1:
                raise ArityError(f"{path}: Retry num must be >= 1, got {num}")
            return TreeNode(kind="retry", num=num, children=(child,))
        return TreeNode(kind="inverter", children=(child,))
    if tag in _COMPOSITES:
        if not kids:
            raise ArityError(f"{path}: <{tag}> needs at least one child")
        children = tuple(_node_from(k, f"{path}/{i}") for i, k in enumerate(kids))
        if tag == "Parallel":
            threshold = _int_attr(el, "threshold", path)
            if not 1 <= threshold <= len(children):
                raise ArityError(
                    f"{path}: Parallel threshold {threshold} out of 1..{len(children)}")
            return TreeNode(kind="parallel", threshold=threshold, children=children)
        return TreeNode(kind=_COMPOSITES[tag], children=children)
    raise UnknownElement(tag)


def _int_attr(el: ET.Element, attr: str, path: str) -> int:
    raw = el.get(attr)
    if raw is None:
        raise SchemaError(path, f"<{el.tag}> missing attribute {attr}")
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(path, f"attribute {attr} must be an integer") from None


_KIND_TO_TAG = {v: k for k, v in {**_COMPOSITES, **_DECORATORS, **_LEAVES}.items()}


def serialize_tree(root: TreeNode) -> str:
    def build(node: TreeNode) -> ET.Element:
        el = ET.Element(_KIND_TO_TAG[node.kind])
        if node.kind in ("action", "condition"):
            el.set("name", node.name)
            el.set("input", node.input)
        elif node.kind == "parallel":
            el.set("threshold", str(node.threshold))
        elif node.kind == "retry":
            el.set("num", str(node.num))
        for child in node.children:
            el.append(build(child))
        return el

    top = ET.Element("BehaviorTree")
    top.append(build(root))
    ET.indent(top)
    return ET.tostring(top, encoding="unicode")


# --- grammar: finite state machine ------------------------------------------

def parse_fsm(payload: str) -> Behavior:
    data = _load_json(payload)
    if not isinstance(data, dict) or "fsm" not in data:
        raise SchemaError("/fsm", "missing")
    fsm = data["fsm"]
    if not isinstance(fsm, dict):
        raise SchemaError("/fsm", "expected an object")
    for key in ("initial", "states", "terminals"):
        if key not in fsm:
            raise SchemaError(f"/fsm/{key}", "missing")
    states_raw = fsm["states"]
    terminals_raw = fsm["terminals"]
    if not isinstance(states_raw, dict) or not states_raw:
        raise SchemaError("/fsm/states", "expected a non-empty object")
    if not isinstance(terminals_raw, dict):
        raise SchemaError("/fsm/terminals", "expected an object")
    overlap = set(states_raw) & set(terminals_raw)
    if overlap:
        raise SchemaError("/fsm", f"ids used as both state and terminal: {sorted(overlap)}")
    terminals = []
    for tid, verdict in terminals_raw.items():
        if verdict not in ("success", "failure"):
            raise SchemaError(f"/fsm/terminals/{tid}", "must be 'success' or 'failure'")
        terminals.append((tid, verdict))
    states = []
    for sid, raw in states_raw.items():
        if not isinstance(raw, dict):
            raise SchemaError(f"/fsm/states/{sid}", "expected an object")
        for key in ("action", "on_success", "on_failure"):
            if key not in raw:
                raise SchemaError(f"/fsm/states/{sid}/{key}", "missing")
        states.append((sid, FsmStateDef(
            action=_check_name(raw["action"], f"/fsm/states/{sid}/action"),
            input=raw.get("input", ""),
            on_success=raw["on_success"],
            on_failure=raw["on_failure"],
        )))
    graph = FsmGraph(initial=fsm["initial"], states=tuple(states),
                     terminals=tuple(terminals))
    _check_fsm(graph)
    return Behavior(mode="fsm", fsm=graph, source_tag="json")


def _check_fsm(graph: FsmGraph) -> None:
    states = graph.state_map()
    terminals = graph.terminal_map()
    if graph.initial not in states:
        raise SchemaError("/fsm/initial", f"{graph.initial!r} is not a state")
    for sid, d in graph.states:
        for label, target in (("on_success", d.on_success), ("on_failure", d.on_failure)):
            if target not in states and target not in terminals:
                raise DanglingTransition(sid, label, target)
    # a success terminal must be reachable from the initial state
    frontier = [graph.initial]
    seen = set()
    while frontier:
        cur = frontier.pop()
        if cur in seen:
            continue
        seen.add(cur)
        if terminals.get(cur) == "success":
            return
        if cur in states:
            frontier.extend((states[cur].on_success, states[cur].on_failure))
    raise NoSuccessTerminal("no success terminal reachable from the initial state")


def serialize_fsm(graph: FsmGraph) -> str:
    return json.dumps({
        "fsm": {
            "initial": graph.initial,
            "states": {
                sid: {
                    "action": d.action,
                    "input": d.input,
                    "on_success": d.on_success,
                    "on_failure": d.on_failure,
                }
                for sid, d in graph.states
            },
            "terminals": {tid: verdict for tid, verdict in graph.terminals},
        }
    }, indent=2)


# --- grammar: call script ---------------------------------------------------

_CALL_RE = re.compile(
    r'^([a-z0-9_]+)\(\s*(?:"([^"]*)")?\s*\)\s*(?:#.*)?$')


def parse_script(payload: str) -> Behavior:
    """Straight-line calls only: one name("input") per line, no control flow."""
    steps = []
    for line_no, raw in enumerate(payload.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _CALL_RE.match(line)
        if not m:
            raise UnsupportedConstruct(line_no, line)
        steps.append(ActionStep(name=m.group(1), input=m.group(2) or ""))
    return Behavior(mode="sequence", steps=tuple(steps), source_tag="python")


def serialize_script(steps: tuple[ActionStep, ...] | list[ActionStep]) -> str:
    return "\n".join(
        f'{s.name}("{s.input}")' if s.input else f"{s.name}()" for s in steps
    )


# --- dispatch and conversions -----------------------------------------------

def parse_block(block: FencedBlock | str, payload: str | None = None) -> Behavior:
    """Parse one fenced block, or a bare (tag, payload) pair."""
    if isinstance(block, str):
        block = FencedBlock(tag=block, payload=payload or "", start=0, end=0)
    if block.tag == "python":
        return parse_script(block.payload)
    if block.tag == "xml":
        return parse_tree(block.payload)
    data = _load_json(block.payload)
    if isinstance(data, dict) and "fsm" in data:
        return parse_fsm(block.payload)
    return parse_sequence(block.payload)


def parse_response(text: str) -> Behavior:
    """Full path from a raw model reply to a validated behavior."""
    return parse_block(extract_fenced_block(text))


def sequence_to_tree(steps) -> TreeNode:
    if not steps:
        raise SchemaError("/", "cannot encode an empty sequence as a tree")
    return TreeNode(kind="sequence", children=tuple(
        TreeNode(kind="action", name=s.name, input=s.input) for s in steps))


def sequence_to_fsm(steps) -> FsmGraph:
    if not steps:
        raise SchemaError("/", "cannot encode an empty sequence as a state machine")
    states = []
    for i, s in enumerate(steps):
        nxt = f"s{i + 1}" if i + 1 < len(steps) else "done"
        states.append((f"s{i}", FsmStateDef(
            action=s.name, input=s.input, on_success=nxt, on_failure="failed")))
    return FsmGraph(initial="s0", states=tuple(states),
                    terminals=(("done", "success"), ("failed", "failure")))


def tree_to_sequence(root: TreeNode) -> tuple[ActionStep, ...]:
    if root.kind == "action":
        return (ActionStep(root.name, root.input),)
    if root.kind != "sequence" or any(c.kind != "action" for c in root.children):
        raise SchemaError("/", "only a flat Sequence of Actions converts to a sequence")
    return tuple(ActionStep(c.name, c.input) for c in root.children)


def fsm_to_sequence(graph: FsmGraph) -> tuple[ActionStep, ...]:
    states = graph.state_map()
    terminals = graph.terminal_map()
    steps = []
    cur = graph.initial
    seen = set()
    while cur in states:
        if cur in seen:
            raise SchemaError("/fsm", "graph is not a linear chain")
        seen.add(cur)
        d = states[cur]
        if terminals.get(d.on_failure) != "failure":
            raise SchemaError("/fsm", "graph is not a linear chain")
        steps.append(ActionStep(d.action, d.input))
        cur = d.on_success
    if terminals.get(cur) != "success":
        raise SchemaError("/fsm", "graph is not a linear chain")
    return tuple(steps)


def plan_to_payload(plan, mode: str) -> tuple[str, str]:
    """Serialize a list of (name, input) pairs into a grammar payload."""
    steps = [ActionStep(name, arg) for name, arg in plan]
    if mode == "sequence":
        return "json", serialize_sequence(steps)
    if mode == "tree":
        return "xml", serialize_tree(sequence_to_tree(steps))
    if mode == "fsm":
        return "json", serialize_fsm(sequence_to_fsm(steps))
    if mode == "script":
        return "python", serialize_script(steps)
    raise SchemaError("/", f"unknown mode {mode!r}")


def serialize_behavior(behavior: Behavior) -> tuple[str, str]:
    """Canonical (tag, payload) for a behavior, honoring its source grammar."""
    if behavior.mode == "tree":
        return "xml", serialize_tree(behavior.root)
    if behavior.mode == "fsm":
        return "json", serialize_fsm(behavior.fsm)
    if behavior.source_tag == "python":
        return "python", serialize_script(behavior.steps)
    return "json", serialize_sequence(behavior.steps)
