"""Learning arm motions from single demonstrations.

A demonstrated trajectory is encoded as a second-order attractor toward
the goal plus a learned forcing term:

    T * dv/dt = alpha_z * (beta_z * (g - y) - v) + f(x)
    T * dy/dt = v
    T * dx/dt = -alpha_x * x,          x(0) = 1

with f(x) = x * sum_i(psi_i(x) * w_i) / sum_i(psi_i(x)) and Gaussian
basis psi_i(x) = exp(-h_i * (x - c_i)**2).  The forcing is deliberately
not premultiplied by (g - y0), so a flat demonstration yields zero
weights.  Weights come from locally weighted regression against the
forcing the demonstration itself implies; derivatives are taken with
central finite differences on the demo grid.

The rollout engine advances the phase exactly (it has a closed form)
and integrates the transformation system with explicit Euler, so its
error shrinks linearly with dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import ActionLibrary, AtomicActionSpec, EndpointBinding
from .errors import BadDt, DegenerateDemo, EmptyDescription, MalformedFile

ALPHA_Z = 25.0
BETA_Z = ALPHA_Z / 4.0
ALPHA_X = ALPHA_Z / 3.0
RIDGE = 1e-8


@dataclass(frozen=True, eq=False)
class DemonstrationTrajectory:
    times: np.ndarray        # (N,), t[0] == 0, strictly increasing
    positions: np.ndarray    # (N, D)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.positions, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if t.ndim != 1 or len(t) != len(y):
            raise DegenerateDemo("times and positions disagree in length")
        if len(t) < 3:
            raise DegenerateDemo(f"need at least 3 samples, got {len(t)}")
        if t[0] != 0.0:
            raise DegenerateDemo("demonstration must start at t=0")
        if not np.all(np.diff(t) > 0):
            raise DegenerateDemo("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", y)

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def dims(self) -> int:
        return self.positions.shape[1]


def parse_demo_csv(text: str) -> DemonstrationTrajectory:
    """Rows of t,y1,...,yD with an optional header line."""
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        cells = line.split(",")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            if line_no == 1:
                continue  # header
            raise MalformedFile(f"line {line_no}: non-numeric cell") from None
    if not rows:
        raise DegenerateDemo("empty demonstration file")
    width = len(rows[0])
    if width < 2 or any(len(r) != width for r in rows):
        raise MalformedFile("rows must all be t plus at least one dimension")
    data = np.asarray(rows, dtype=float)
    return DemonstrationTrajectory(times=data[:, 0], positions=data[:, 1:])


@dataclass(frozen=True, eq=False)
class MovementModel:
    weights: np.ndarray          # (D, n_basis)
    centers: np.ndarray          # (n_basis,)
    widths: np.ndarray           # (n_basis,)
    y0: np.ndarray               # (D,)
    goal: np.ndarray             # (D,)
    duration: float
    alpha_z: float = ALPHA_Z
    beta_z: float = BETA_Z
    alpha_x: float = ALPHA_X
    degenerate_bases: tuple[int, ...] = ()

    @property
    def dims(self) -> int:
        return len(self.y0)

    @property
    def n_basis(self) -> int:
        return len(self.centers)


@dataclass(frozen=True, eq=False)
class RolloutResult:
    times: np.ndarray        # (M,)
    positions: np.ndarray    # (M, D)
    velocities: np.ndarray   # (M, D)


def _basis_layout(n_basis: int, duration: float) -> tuple[np.ndarray, np.ndarray]:
    # centers at equal time spacing, mapped through the phase decay
    anchor_times = np.linspace(0.0, duration, n_basis)
    centers = np.exp(-ALPHA_X * anchor_times / duration)
    widths = np.empty(n_basis)
    widths[:-1] = 1.0 / np.diff(centers) ** 2
    widths[-1] = widths[-2]
    return centers, widths


def _psi(centers: np.ndarray, widths: np.ndarray, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.exp(-widths[None, :] * (x[:, None] - centers[None, :]) ** 2)


def fit(demo: DemonstrationTrajectory, n_basis: int = 20,
        ridge: float = RIDGE) -> MovementModel:
    """Locally weighted regression of the forcing the demo implies."""
    if n_basis < 2:
        raise DegenerateDemo(f"need at least 2 basis functions, got {n_basis}")
    t = demo.times
    y = demo.positions
    T = demo.duration
    y0 = y[0].copy()
    goal = y[-1].copy()
    dy = np.gradient(y, t, axis=0)
    ddy = np.gradient(dy, t, axis=0)
    # invert the transformation system for the forcing at each sample
    f_target = T * T * ddy - ALPHA_Z * (BETA_Z * (goal[None, :] - y) - T * dy)
    x = np.exp(-ALPHA_X * t / T)
    centers, widths = _basis_layout(n_basis, T)
    psi = _psi(centers, widths, x)                      # (N, n_basis)
    raw_denom = psi.T @ (x * x)                         # (n_basis,)
    numer = psi.T @ (x[:, None] * f_target)             # (n_basis, D)
    weights = (numer / (raw_denom + ridge)[:, None]).T  # (D, n_basis)
    degenerate = tuple(int(i) for i in np.nonzero(raw_denom < 1e-12)[0])
    return MovementModel(weights=weights, centers=centers, widths=widths,
                         y0=y0, goal=goal, duration=T,
                         degenerate_bases=degenerate)


def rollout(model: MovementModel, dt: float = 0.01, duration_factor: float = 1.0,
            y0: np.ndarray | None = None,
            goal: np.ndarray | None = None) -> RolloutResult:
    if not (isinstance(dt, (int, float)) and math.isfinite(dt)) or dt <= 0:
        raise BadDt(f"dt must be a positive finite number, got {dt!r}")
    if duration_factor <= 0:
        raise BadDt(f"duration_factor must be positive, got {duration_factor!r}")
    T = model.duration
    y = np.array(model.y0 if y0 is None else y0, dtype=float)
    g = np.array(model.goal if goal is None else goal, dtype=float)
    v = np.zeros_like(y)
    x = 1.0
    decay = math.exp(-model.alpha_x * dt / T)
    n_steps = int(round(T * duration_factor / dt))
    times = np.empty(n_steps + 1)
    positions = np.empty((n_steps + 1, len(y)))
    velocities = np.empty((n_steps + 1, len(y)))
    times[0], positions[0], velocities[0] = 0.0, y, v
    for k in range(n_steps):
        f = _forcing(model, x)
        y = positions[k] + dt * velocities[k] / T
        v = velocities[k] + dt * (model.alpha_z * (model.beta_z * (g - positions[k])
                                                   - velocities[k]) + f) / T
        x *= decay
        times[k + 1] = (k + 1) * dt
        positions[k + 1] = y
        velocities[k + 1] = v
    return RolloutResult(times=times, positions=positions, velocities=velocities)


def _forcing(model: MovementModel, x: float) -> np.ndarray:
    psi = _psi(model.centers, model.widths, x)[0]
    denom = float(psi.sum())
    if denom < 1e-12:
        return np.zeros(model.dims)
    return x * (model.weights @ psi) / denom


def slugify(description: str) -> str:
    slug = "".join(c if c.isalnum() else "_" for c in description.lower())
    slug = "_".join(p for p in slug.split("_") if p)
    return slug


class SkillStore:
    """Holds learned models and plays them as single atomic steps."""

    def __init__(self, workspace_low: float = -10.0, workspace_high: float = 10.0,
                 dt: float = 0.01):
        self.models: dict[str, MovementModel] = {}
        self.workspace_low = workspace_low
        self.workspace_high = workspace_high
        self.dt = dt

    def add(self, name: str, model: MovementModel) -> None:
        self.models[name] = model

    def play(self, skill_id: str) -> tuple[bool, str]:
        """(ok, detail); fails only when the rollout leaves the workspace."""
        if skill_id not in self.models:
            return False, "unknown skill"
        result = rollout(self.models[skill_id], dt=self.dt)
        if (result.positions < self.workspace_low).any() \
                or (result.positions > self.workspace_high).any():
            return False, "left the workspace"
        return True, f"{len(result.times)} samples"


def register_skill(model: MovementModel, description: str, lib: ActionLibrary,
                   store: SkillStore) -> str:
    """Add a learned skill to the library under a name derived from its description."""
    if not description or not description.strip():
        raise EmptyDescription("skill description is empty")
    base = slugify(description) or "skill"
    name = base
    suffix = 2
    while name in lib:
        name = f"{base}_{suffix}"
        suffix += 1
    store.add(name, model)
    lib.add(AtomicActionSpec(
        name=name, type="code", description=description.strip(),
        endpoint=EndpointBinding(kind="dmp_skill", target=name)))
    return name
