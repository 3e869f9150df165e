"""Task descriptions shared by the world, the planners, and the bench."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class GoalClause:
    """One atomic goal: in_zone(subject, zone) or on(subject, target object)."""

    kind: str          # "in_zone" | "on"
    subject: str       # object descriptor, e.g. "blue cube"
    target: str        # zone name for in_zone, object descriptor for on

    def to_dict(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "target": self.target}

    @staticmethod
    def from_dict(d: dict) -> "GoalClause":
        return GoalClause(kind=d["kind"], subject=d["subject"], target=d["target"])


@dataclass(frozen=True)
class TaskSpec:
    id: str
    n_boxes: int
    instruction: str
    goals: tuple[GoalClause, ...]
    seed: int = 0

    @property
    def order_constrained(self) -> bool:
        """True when the goals form a stacking chain whose build order matters."""
        bases = {g.target for g in self.goals if g.kind == "on"}
        tops = {g.subject for g in self.goals if g.kind == "on"}
        return bool(bases & tops)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "n_boxes": self.n_boxes,
            "instruction": self.instruction,
            "goals": [g.to_dict() for g in self.goals],
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            id=d["id"],
            n_boxes=d["n_boxes"],
            instruction=d["instruction"],
            goals=tuple(GoalClause.from_dict(g) for g in d["goals"]),
            seed=d.get("seed", 0),
        )
