"""Backends that turn a prompt into a model reply.

One real backend speaks the chat-completions wire format over HTTP with
retry and backoff.  The rest are deterministic stand-ins for tests and
benchmarks: replay serves a recorded transcript keyed by prompt hash,
oracle emits the ground-truth plan in the requested grammar, corrupting
applies exactly one seeded mutation to the oracle plan (and heals once
corrective feedback appears), and the supervisory table maps jog
commands to sequences.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .clocks import SimClock, WallClock
from .errors import BadConfig, GatewayTimeout, NoTranscriptEntry, TransportError
from .prompts import Prompt
from .world import COLORS

Plan = list[tuple[str, str]]


@dataclass(frozen=True)
class LlmResponse:
    text: str
    latency_ms: float
    backend_id: str


@dataclass(frozen=True)
class GatewayConfig:
    backend: str                      # http | replay | oracle | corrupting | supervisory_script
    model: str = ""
    base_url: str = ""
    api_key_env: str = ""
    temperature: float = 0.0
    timeout_s: float = 30.0
    max_retries: int = 2
    transcript_path: str = ""
    corruption_seed: int = 0
    record_path: str = ""

    def to_dict(self) -> dict:
        return {
            "backend": self.backend, "model": self.model,
            "base_url": self.base_url, "api_key_env": self.api_key_env,
            "temperature": self.temperature, "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
            "transcript_path": self.transcript_path,
            "corruption_seed": self.corruption_seed,
            "record_path": self.record_path,
        }

    @staticmethod
    def from_dict(d: dict) -> "GatewayConfig":
        return GatewayConfig(**{k: d[k] for k in GatewayConfig.__dataclass_fields__
                                if k in d})


def prompt_hash(prompt: Prompt | str) -> str:
    rendered = prompt if isinstance(prompt, str) else prompt.rendered
    return hashlib.sha256(rendered.encode("utf-8")).hexdigest()


def feedback_entries(prompt: Prompt) -> list[str]:
    """Recover the feedback strings embedded in a rendered prompt."""
    body = prompt.section("FEEDBACK HISTORY")
    if body == "(none yet)":
        return []
    out = []
    for line in body.splitlines():
        m = re.match(r"FEEDBACK\[\d+\]: (.*)$", line)
        if m:
            out.append(m.group(1))
    return out


def _planned_reply(plan: Plan, mode: str) -> str:
    from .parsing import fenced, plan_to_payload

    tag, payload = plan_to_payload(plan, mode)
    prose = ("Looking at the scene, the request breaks down into "
             f"{len(plan)} steps in order, each using a listed action.")
    return f"{prose}\n{fenced(tag, payload)}"


class OracleBackend:
    """Scenario-coupled ground truth: always answers with the clean plan."""

    backend_id = "oracle"

    def __init__(self, planner):
        if planner is None:
            raise BadConfig("oracle backend needs a planner")
        self.planner = planner

    def complete(self, prompt: Prompt) -> LlmResponse:
        plan = self.planner(feedback_entries(prompt))
        return LlmResponse(_planned_reply(plan, prompt.mode), 0.0, self.backend_id)


def corrupt_plan(plan: Plan, seed: int) -> tuple[Plan, tuple[str, int]]:
    """Apply exactly one seeded mutation; returns (plan, (kind, position)).

    kind = seed % 3 picks swap, drop, or rename-target; seed // 3 picks
    the position.  Degenerate plans fall back deterministically: a swap
    needs two steps and a rename needs a step with an input, otherwise
    the mutation degrades to a drop.
    """
    n = len(plan)
    if n == 0:
        return list(plan), ("noop", 0)
    kind = ("swap", "drop", "rename")[seed % 3]
    shift = seed // 3
    if kind == "swap" and n < 2:
        kind = "drop"
    if kind == "rename" and not any(arg for _, arg in plan):
        kind = "drop"
    mutated = list(plan)
    if kind == "swap":
        i = shift % (n - 1)
        mutated[i], mutated[i + 1] = mutated[i + 1], mutated[i]
        return mutated, ("swap", i)
    if kind == "drop":
        i = shift % n
        del mutated[i]
        return mutated, ("drop", i)
    candidates = [i for i, (_, arg) in enumerate(plan) if arg]
    i = candidates[shift % len(candidates)]
    name, arg = mutated[i]
    mutated[i] = (name, _rename_target(arg, seed))
    return mutated, ("rename", i)


def _rename_target(arg: str, seed: int) -> str:
    palette = [c for c in COLORS if c != "none"]
    words = arg.split()
    for j, w in enumerate(words):
        if w in palette:
            step = 1 + seed % (len(palette) - 1)
            words[j] = palette[(palette.index(w) + step) % len(palette)]
            return " ".join(words)
    return arg + " replica"


class CorruptingBackend:
    """One seeded mutation of the oracle plan, healed by any feedback."""

    def __init__(self, planner, seed: int):
        if planner is None:
            raise BadConfig("corrupting backend needs a planner")
        self.planner = planner
        self.seed = seed
        self.backend_id = f"corrupting:{seed}"

    def complete(self, prompt: Prompt) -> LlmResponse:
        feedback = feedback_entries(prompt)
        plan = self.planner(feedback)
        if not feedback:
            plan, _ = corrupt_plan(plan, self.seed)
        return LlmResponse(_planned_reply(plan, prompt.mode), 0.0, self.backend_id)


class ReplayBackend:
    """Serves recorded responses keyed by the hash of the rendered prompt."""

    backend_id = "replay"

    def __init__(self, source: str | Path | dict):
        if isinstance(source, dict):
            self.entries = dict(source)
        else:
            self.entries = {}
            for line in Path(source).read_text().splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                self.entries[rec["prompt_hash"]] = rec["response"]

    def complete(self, prompt: Prompt) -> LlmResponse:
        h = prompt_hash(prompt)
        if h not in self.entries:
            raise NoTranscriptEntry(h)
        return LlmResponse(self.entries[h], 0.0, self.backend_id)


class RecordingGateway:
    """Wraps any backend and appends (prompt_hash, response) pairs to JSONL."""

    def __init__(self, inner, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self.backend_id = getattr(inner, "backend_id", "recorded")

    def complete(self, prompt: Prompt) -> LlmResponse:
        response = self.inner.complete(prompt)
        with self.path.open("a") as fh:
            fh.write(json.dumps({"prompt_hash": prompt_hash(prompt),
                                 "response": response.text}) + "\n")
        return response


class HttpBackend:
    """Chat-completions client: system = preamble, user = everything else."""

    def __init__(self, cfg: GatewayConfig, transport: httpx.BaseTransport | None = None,
                 clock=None):
        if not cfg.base_url:
            raise BadConfig("http backend needs base_url")
        self.cfg = cfg
        self.clock = clock or WallClock()
        self.backend_id = f"http:{cfg.model or 'default'}"
        self._client = httpx.Client(
            base_url=cfg.base_url, timeout=cfg.timeout_s, transport=transport)

    def complete(self, prompt: Prompt) -> LlmResponse:
        body = {
            "model": self.cfg.model or "default",
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
            "temperature": self.cfg.temperature,
        }
        headers = {}
        if self.cfg.api_key_env and os.environ.get(self.cfg.api_key_env):
            headers["Authorization"] = f"Bearer {os.environ[self.cfg.api_key_env]}"
        started = self.clock.monotonic()
        last_error: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                self.clock.sleep(0.5 * 2 ** (attempt - 1))
            try:
                resp = self._client.post("/chat/completions", json=body,
                                         headers=headers)
            except httpx.TimeoutException as exc:
                last_error = GatewayTimeout(str(exc))
                continue
            except httpx.HTTPError as exc:
                last_error = TransportError(str(exc))
                continue
            if resp.status_code >= 500:
                last_error = TransportError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise TransportError(f"request rejected with {resp.status_code}")
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise TransportError(f"malformed completion payload: {exc}") from exc
            latency_ms = (self.clock.monotonic() - started) * 1000.0
            return LlmResponse(text, latency_ms, self.backend_id)
        raise last_error if last_error else TransportError("no attempts made")


# --- supervisory command table ----------------------------------------------

_DIRECTIONS = {
    "left": "move_left", "right": "move_right",
    "up": "move_up", "down": "move_down",
    "forward": "move_forward", "forwards": "move_forward",
    "backward": "move_backward", "backwards": "move_backward", "back": "move_backward",
}
_COUNTS = {"once": 1, "twice": 2, "thrice": 3}
_SPLIT_RE = re.compile(r"\s*(?:,|;|\band then\b|\bthen\b|\band\b)\s*")


def parse_command(text: str) -> Plan | None:
    """Strict jog-command grammar; None when any clause is out of vocabulary."""
    plan: Plan = []
    clauses = [c for c in _SPLIT_RE.split(text.lower().strip().rstrip(".")) if c]
    if not clauses:
        return None
    for clause in clauses:
        tokens = [t for t in re.split(r"\s+", clause) if t not in ("the", "please")]
        steps = _parse_clause(tokens)
        if steps is None:
            return None
        plan.extend(steps)
    return plan


def _parse_clause(tokens: list[str]) -> Plan | None:
    if not tokens:
        return None
    if tokens[0] in ("open", "close") and len(tokens) == 2 and tokens[1] == "gripper":
        return [(f"{tokens[0]}_gripper", "")]
    if tokens[0] in ("go", "move") and len(tokens) >= 2 and tokens[1] in _DIRECTIONS:
        action = _DIRECTIONS[tokens[1]]
        rest = tokens[2:]
        if not rest:
            return [(action, "")]
        count = _parse_count(rest)
        if count is None:
            return None
        return [(action, "")] * count
    return None


def _parse_count(tokens: list[str]) -> int | None:
    if len(tokens) == 1 and tokens[0] in _COUNTS:
        return _COUNTS[tokens[0]]
    if len(tokens) == 2 and tokens[0].isdigit() and tokens[1] in ("times", "time"):
        count = int(tokens[0])
        return count if count >= 1 else None
    return None


class SupervisoryScriptBackend:
    """Maps operator jog commands to sequences through a fixed vocabulary.

    Out-of-vocabulary commands get a plain-prose refusal with no fenced
    block, which the pipeline records as a parse failure.
    """

    backend_id = "supervisory_script"

    def complete(self, prompt: Prompt) -> LlmResponse:
        command = prompt.section("REQUEST")
        plan = parse_command(command)
        if plan is None:
            text = ("I do not understand that command. Known moves: go or move "
                    "plus left, right, up, down, forward, backward, an optional "
                    "count, and open or close the gripper.")
            return LlmResponse(text, 0.0, self.backend_id)
        return LlmResponse(_planned_reply(plan, prompt.mode), 0.0, self.backend_id)


def build_gateway(cfg: GatewayConfig, planner=None,
                  transport: httpx.BaseTransport | None = None, clock=None):
    if cfg.backend == "http":
        gateway = HttpBackend(cfg, transport=transport, clock=clock)
    elif cfg.backend == "replay":
        if not cfg.transcript_path:
            raise BadConfig("replay backend needs transcript_path")
        gateway = ReplayBackend(cfg.transcript_path)
    elif cfg.backend == "oracle":
        gateway = OracleBackend(planner)
    elif cfg.backend == "corrupting":
        gateway = CorruptingBackend(planner, cfg.corruption_seed)
    elif cfg.backend == "supervisory_script":
        gateway = SupervisoryScriptBackend()
    else:
        raise BadConfig(f"unknown gateway backend {cfg.backend!r}")
    if cfg.record_path:
        gateway = RecordingGateway(gateway, cfg.record_path)
    return gateway


def complete(gateway, prompt: Prompt) -> LlmResponse:
    return gateway.complete(prompt)
