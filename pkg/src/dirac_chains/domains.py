"""Convex domains in R^n.

Membership is closed (boundary points count as inside) so that lattices
spanning a box and cells touching its faces can be used directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DimensionError("box corners have different lengths")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box corners out of order: {lo} > {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((p >= np.array(self.lo)) & (p <= np.array(self.hi)), axis=1)

    def bounding_box(self) -> Box:
        return self

    def product(self, other: Box) -> Box:
        return Box(self.lo + other.lo, self.hi + other.hi)

    def to_json(self) -> dict:
        return {"box": [list(self.lo), list(self.hi)]}


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        d = p - np.array(self.center)
        return np.einsum("ij,ij->i", d, d) <= self.radius ** 2

    def bounding_box(self) -> Box:
        c = np.array(self.center)
        return Box(tuple(c - self.radius), tuple(c + self.radius))

    def to_json(self) -> dict:
        return {"ball": {"center": list(self.center), "radius": self.radius}}


Domain = Box | Ball


def domain_from_json(obj) -> Domain | None:
    if obj is None:
        return None
    if "box" in obj:
        lo, hi = obj["box"]
        return Box(tuple(lo), tuple(hi))
    if "ball" in obj:
        return Ball(tuple(obj["ball"]["center"]), obj["ball"]["radius"])
    raise ValueError(f"unknown domain encoding: {obj!r}")


def contains_all(domain: Domain | None, points) -> bool:
    if domain is None:
        return True
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[0] == 0:
        return True
    return bool(np.all(domain.contains(p)))
