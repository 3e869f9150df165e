"""Real and simulated clocks.

Anything that sleeps or measures time takes a clock so tests can run on
simulated time and stay deterministic.
"""
from __future__ import annotations

import time


class WallClock:
    def monotonic(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class SimClock:
    """Manual clock: sleep() just advances the counter."""

    def __init__(self, start: float = 0.0):
        self.now = float(start)

    def monotonic(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.now += max(0.0, float(seconds))
