"""Galton-board geometry: atom sites, waveguides, detectors and parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

SOURCE_WEIGHT = 1.0 / math.sqrt(2.0)


class InvalidDetector(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Site:
    """Atom at step ``n`` and horizontal coordinate ``x``."""

    n: int
    x: int

    def __post_init__(self):
        if self.n < 1 or abs(self.x) > self.n or (self.n - self.x) % 2:
            raise ValueError(f"invalid site ({self.n}, {self.x})")

    @property
    def is_edge(self) -> bool:
        return abs(self.x) == self.n

    def __str__(self) -> str:
        return f"({self.n},{self.x})"


@dataclass(frozen=True)
class WaveguideId:
    """Waveguide crossing step 0 at ``x = m`` heading right (``+``) or left (``-``)."""

    m: int
    nu: str

    def __post_init__(self):
        if self.m % 2 or self.nu not in "+-" or len(self.nu) != 1:
            raise ValueError(f"invalid waveguide ({self.m}, {self.nu})")

    def site_at(self, n: int) -> Site | None:
        x = self.m + n if self.nu == "+" else self.m - n
        if abs(x) > n:
            return None
        return Site(n, x)


@dataclass(frozen=True, order=True)
class DetectorId:
    """Output port ``(x, d)`` after the final step; ``d`` is ``"L"`` or ``"R"``."""

    x: int
    d: str

    def __post_init__(self):
        if self.d not in ("L", "R"):
            raise InvalidDetector(f"detector direction must be 'L' or 'R', got {self.d!r}")

    def mirror(self) -> "DetectorId":
        return DetectorId(-self.x, "R" if self.d == "L" else "L")

    def __str__(self) -> str:
        return f"{self.x:+d},{self.d}"

    @classmethod
    def parse(cls, text: str) -> "DetectorId":
        try:
            x, d = text.split(",")
            return cls(int(x), d.strip().upper())
        except ValueError as exc:
            raise InvalidDetector(f"cannot parse detector label {text!r}") from exc


@dataclass(frozen=True)
class WalkParams:
    """Physical parameters in units with group velocity 1 (rotating frame).

    ``kappa << gamma`` is the narrowband regime the linear reference walk
    assumes; it is not enforced.
    """

    gamma: float = 1.0
    kappa: float = 0.002
    delta: float = 1.0
    steps: int = 9

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.kappa > 0:
            raise ValueError("kappa must be > 0")
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be an integer >= 1")

    @property
    def mu(self) -> complex:
        return complex(self.kappa, self.delta)


@lru_cache(maxsize=None)
def sites(N: int) -> tuple[Site, ...]:
    """All atoms of an ``N``-step board sorted by step then position."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return tuple(Site(n, x) for n in range(1, N + 1) for x in range(-n, n + 1, 2))


@lru_cache(maxsize=None)
def predecessors(s: Site) -> tuple[Site, ...]:
    """Earlier atoms on the two backward diagonal rays through ``s``."""
    out = []
    for n in range(s.n - 1, 0, -1):
        dn = s.n - n
        for x in (s.x - dn, s.x + dn):
            if abs(x) <= n:
                out.append(Site(n, x))
    return tuple(sorted(out))


def source_coefficient(s: Site) -> float:
    """Weight of the source beamsplitter output feeding ``s`` (edge sites only)."""
    return SOURCE_WEIGHT if s.is_edge else 0.0


def detectors(N: int) -> tuple[DetectorId, ...]:
    """The ``2N+2`` detectors ordered by ``x`` then direction (L before R)."""
    return tuple(DetectorId(x, d) for x in range(-N, N + 1, 2) for d in ("L", "R"))


def detector_waveguide(det: DetectorId, N: int) -> WaveguideId:
    if abs(det.x) > N or (N - det.x) % 2:
        raise InvalidDetector(f"detector {det} is not an output of a {N}-step board")
    if det.d == "R":
        return WaveguideId(det.x - N, "+")
    return WaveguideId(det.x + N, "-")


@lru_cache(maxsize=None)
def detector_expansion(det: DetectorId, N: int) -> tuple[float, tuple[Site, ...]]:
    """Output field of ``det`` as (source weight, atoms feeding its waveguide).

    The field is ``weight * b_in + sum_atoms sqrt(gamma) * (-i a)``; the atom at
    step ``N`` is included.
    """
    wg = detector_waveguide(det, N)
    chain = tuple(s for n in range(1, N + 1) if (s := wg.site_at(n)) is not None)
    coeff = SOURCE_WEIGHT if wg.m == 0 else 0.0
    return coeff, chain


def in_light_cone(src: Site, dst: Site) -> bool:
    return dst.n >= src.n and abs(dst.x - src.x) <= dst.n - src.n
