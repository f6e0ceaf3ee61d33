"""Built-in models: the three worked examples and the QWZ family."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .expr import SurfacePair
from .model import BulkModel, LocalFormModel, qwz_model

PI = math.pi


@dataclass(frozen=True)
class Preset:
    name: str
    pair: SurfacePair
    base: tuple[float, float] | None = None
    order: tuple[tuple[float, float], ...] | None = None
    bulk: BulkModel | None = None
    description: str = ""
    extra: dict = field(default_factory=dict)

    def model(self) -> BulkModel:
        return self.bulk if self.bulk is not None else LocalFormModel(self.pair, self.name)


EXAMPLE1_A = "2 + cos(kx) + cos(ky)"
EXAMPLE1_B = "sin(ky)"
EXAMPLE2_A = "cos(kx) + cos(ky)"
EXAMPLE2_B = "sin(ky)"
EXAMPLE3_A = "2 + cos(kx) + cos(ky)"
EXAMPLE3_B = "sin(ky) - cos(kx)"


def _example1():
    return Preset("example1", SurfacePair.parse(EXAMPLE1_A, EXAMPLE1_B), base=(0.0, 0.0),
                  order=((PI / 2, PI), (3 * PI / 2, PI)),
                  description="two Weyl points joined by one arc along ky = pi")


def _example1_alt():
    # Any kx0 in (pi/2, 3pi/2) other than pi works; 3pi/4 keeps the line well
    # away from both projected points and from the degenerate crossing at kx = pi.
    return Preset("example1-alt", SurfacePair.parse(EXAMPLE1_A, EXAMPLE1_B), base=(3 * PI / 4, 0.0),
                  order=((PI / 2, PI), (3 * PI / 2, PI)),
                  description="example1 with the base line kx0 inside the arc's span")


def _example2():
    return Preset("example2", SurfacePair.parse(EXAMPLE2_A, EXAMPLE2_B), base=(PI / 4, 7 * PI / 4),
                  order=((PI / 2, 0.0), (3 * PI / 2, 0.0), (PI / 2, PI), (3 * PI / 2, PI)),
                  description="four Weyl points and two arcs")


def _example3():
    return Preset("example3", SurfacePair.parse(EXAMPLE3_A, EXAMPLE3_B), base=(0.0, 0.0),
                  order=((PI / 2, PI), (PI, 3 * PI / 2), (3 * PI / 2, PI)),
                  description="three projected points, two arcs meeting at (pi, 3pi/2)")


def qwz_preset(n: int, u: float) -> Preset:
    """QWZ family; its local form (after the Hadamard conjugation) depends on kx only."""
    pair = SurfacePair.parse(f"{u!r} + cos({n} * kx)", f"sin({n} * kx)")
    return Preset(f"qwz:{n}:{u:g}", pair, bulk=qwz_model(n, u),
                  description="local form a = u + cos(n kx), b = sin(n kx); bulk model is the 2D QWZ map",
                  extra={"n": n, "u": u})


PRESETS = {
    "example1": _example1,
    "example1-alt": _example1_alt,
    "example2": _example2,
    "example3": _example3,
}


def get_preset(name: str) -> Preset:
    if name in PRESETS:
        return PRESETS[name]()
    if name.startswith("qwz:"):
        parts = name.split(":")
        try:
            n, u = int(parts[1]), float(parts[2])
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"QWZ preset must look like qwz:<n>:<u>, got {name!r}") from exc
        if len(parts) != 3:
            raise ConfigError(f"QWZ preset must look like qwz:<n>:<u>, got {name!r}")
        return qwz_preset(n, u)
    raise ConfigError(f"unknown model preset {name!r}; choose from {sorted(PRESETS)} or qwz:<n>:<u>")
