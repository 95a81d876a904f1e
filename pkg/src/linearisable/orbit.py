"""Orbits of discrete systems: exact values per step, ``None`` marking the point at infinity."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import fraction_str

DIRECT = "direct"
LINEARISED = "linearised"


@dataclass
class Orbit:
    names: tuple
    steps: list = field(default_factory=list)  # one tuple of values per n
    origin: str = DIRECT
    start: int = 0  # n of steps[0]
    blowup: int | None = None  # step at which iteration had to stop

    def column(self, name: str) -> list:
        i = self.names.index(name)
        return [row[i] for row in self.steps]

    def values(self) -> list:
        """Single-variable orbits as a flat list."""
        if len(self.names) != 1:
            raise ValueError("values() needs a single-variable orbit")
        return [row[0] for row in self.steps]

    def __len__(self):
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "origin": self.origin,
            "start": self.start,
            "blowup": self.blowup,
            "steps": [[fraction_str(v) for v in row] for row in self.steps],
        }

    def same_values(self, other: "Orbit") -> bool:
        return self.names == other.names and self.steps == other.steps


def as_value(x):
    """Fraction or None (infinity); ints are promoted."""
    return None if x is None else Fraction(x)
