"""Assembles the text sent to the language model.

A prompt is eight sections in a fixed order: role preamble, action
library, scene observation, worked examples, reasoning instruction, the
operator request, the feedback history, and the answer-format note for
the requested grammar.  Rendering is byte-deterministic so prompts can
be hashed for transcript replay.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import (
    BadExemplarFence,
    EmptyTask,
    MissingFormatNote,
    NoFence,
    UnsupportedMode,
    UnterminatedFence,
)
from .observe import Observation
from .parsing import MODES, extract_fenced_block

SECTION_LABELS = (
    "ROLE",
    "AVAILABLE ACTIONS",
    "CURRENT SCENE",
    "EXAMPLES",
    "REASONING STYLE",
    "REQUEST",
    "FEEDBACK HISTORY",
    "ANSWER FORMAT",
)


@dataclass(frozen=True)
class Exemplar:
    situation: str
    response: str


@dataclass(frozen=True)
class PromptTemplate:
    preamble: str
    cot_instruction: str
    format_notes: dict[str, str]
    exemplars: tuple[Exemplar, ...]


@dataclass(frozen=True)
class Prompt:
    sections: tuple[tuple[str, str], ...]
    rendered: str
    mode: str
    world_version: int

    @property
    def system_text(self) -> str:
        return self.sections[0][1]

    @property
    def user_text(self) -> str:
        return _render(self.sections[1:])

    def section(self, label: str) -> str:
        for name, body in self.sections:
            if name == label:
                return body
        raise KeyError(label)


def _render(sections) -> str:
    return "\n\n".join(f"## {label}\n{body}" for label, body in sections)


def load_template(path: str | Path | None = None) -> PromptTemplate:
    """Load a template file, or the packaged default when path is None."""
    if path is None:
        raw = json.loads(
            resources.files("robochat").joinpath("templates/default.json").read_text())
    else:
        raw = json.loads(Path(path).read_text())
    notes = dict(raw.get("format_notes", {}))
    for mode in MODES:
        if mode not in notes or not notes[mode]:
            raise MissingFormatNote(mode)
    exemplars = []
    for i, ex in enumerate(raw.get("exemplars", [])):
        exemplars.append(Exemplar(situation=ex["situation"], response=ex["response"]))
        _check_exemplar_fence(ex["response"], i)
    return PromptTemplate(
        preamble=raw["preamble"],
        cot_instruction=raw["cot_instruction"],
        format_notes=notes,
        exemplars=tuple(exemplars),
    )


def _check_exemplar_fence(response: str, index: int) -> None:
    try:
        block = extract_fenced_block(response)
    except (NoFence, UnterminatedFence) as exc:
        raise BadExemplarFence(index, str(exc)) from exc
    # a second fenced block would make the exemplar ambiguous
    tail = response[response.index("```", block.end) + 3:]
    if "```" in tail:
        raise BadExemplarFence(index, "more than one fenced block")


def build_prompt(template: PromptTemplate, library_text: str,
                 observation: Observation, task: str,
                 feedback: list[str] | tuple[str, ...] = (),
                 mode: str = "sequence") -> Prompt:
    if mode not in MODES:
        raise UnsupportedMode(mode)
    if not task or not task.strip():
        raise EmptyTask("task text is empty")
    exemplar_text = "\n\n".join(
        f"SITUATION: {ex.situation}\nRESPONSE:\n{ex.response}"
        for ex in template.exemplars
    ) or "(none)"
    feedback_text = "\n".join(
        f"FEEDBACK[{k}]: {text}" for k, text in enumerate(feedback, start=1)
    ) or "(none yet)"
    sections = (
        (SECTION_LABELS[0], template.preamble),
        (SECTION_LABELS[1], library_text),
        (SECTION_LABELS[2], observation.text),
        (SECTION_LABELS[3], exemplar_text),
        (SECTION_LABELS[4], template.cot_instruction),
        (SECTION_LABELS[5], task.strip()),
        (SECTION_LABELS[6], feedback_text),
        (SECTION_LABELS[7], template.format_notes[mode]),
    )
    return Prompt(sections=sections, rendered=_render(sections), mode=mode,
                  world_version=observation.world_version)
