"""Dirac chains, difference chains and the mass norm.

A :class:`DiracChain` of grade k in R^n is stored as two arrays: ``points``
(m x n) and ``coeffs`` (m x binomial(n, k)), one row per k-element (p; alpha).
Chains of grade k > n are allowed as empty placeholders: they arise as the
exact zero output of operators whose result would exceed the ambient
dimension (cones over top-dimensional chains, for instance).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .domains import Domain
from .errors import DimensionError, GradeError
from .exterior import MassEstimate, MultiVector, dim, mass


class DiracChain:
    """Finite formal sum of k-elements (p_i; alpha_i)."""

    __slots__ = ("n", "k", "points", "coeffs")

    def __init__(self, n: int, k: int, points, coeffs, *, normalize: bool = True):
        pts = np.asarray(points, dtype=float).reshape(-1, n)
        cf = np.asarray(coeffs, dtype=float).reshape(pts.shape[0], dim(n, k))
        if normalize:
            pts, cf = _normalize_arrays(pts, cf)
        pts.flags.writeable = False
        cf.flags.writeable = False
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "coeffs", cf)

    def __setattr__(self, name, value):
        raise AttributeError("DiracChain is immutable")

    @classmethod
    def zero(cls, n: int, k: int) -> DiracChain:
        return cls(n, k, np.zeros((0, n)), np.zeros((0, dim(n, k))))

    @classmethod
    def element(cls, point: Sequence[float], alpha: MultiVector | float) -> DiracChain:
        point = np.asarray(point, dtype=float).reshape(-1)
        if not isinstance(alpha, MultiVector):
            alpha = MultiVector.scalar(point.shape[0], float(alpha))
        if alpha.n != point.shape[0]:
            raise DimensionError(f"point in R^{point.shape[0]} but multivector in R^{alpha.n}")
        return cls(alpha.n, alpha.k, point[None, :], alpha.coeffs[None, :])

    @classmethod
    def from_terms(cls, n: int, k: int, terms: Iterable[tuple[Sequence[float], MultiVector | float]]) -> DiracChain:
        pts, cfs = [], []
        for p, alpha in terms:
            if not isinstance(alpha, MultiVector):
                alpha = MultiVector.scalar(n, float(alpha))
            if alpha.n != n or alpha.k != k:
                raise GradeError(f"term of grade {alpha.k} in R^{alpha.n} in a grade-{k} chain in R^{n}")
            pts.append(np.asarray(p, dtype=float))
            cfs.append(alpha.coeffs)
        if not pts:
            return cls.zero(n, k)
        return cls(n, k, np.stack(pts), np.stack(cfs))

    @property
    def degenerate(self) -> bool:
        """True for chains of grade above the ambient dimension (always zero)."""
        return self.k > self.n

    def __len__(self):
        return self.points.shape[0]

    def is_zero(self) -> bool:
        return len(self) == 0

    @property
    def terms(self) -> list[tuple[tuple[float, ...], MultiVector]]:
        if self.degenerate:
            return []
        return [(tuple(p), MultiVector(self.n, self.k, c)) for p, c in zip(self.points, self.coeffs)]

    def _check(self, other: DiracChain):
        if self.n != other.n:
            raise DimensionError(f"chains live in R^{self.n} and R^{other.n}")
        if self.k != other.k:
            raise GradeError(f"chains have grades {self.k} and {other.k}")

    def __add__(self, other: DiracChain) -> DiracChain:
        self._check(other)
        return DiracChain(
            self.n, self.k,
            np.concatenate([self.points, other.points]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def __sub__(self, other: DiracChain) -> DiracChain:
        return self + (-other)

    def __neg__(self) -> DiracChain:
        return DiracChain(self.n, self.k, self.points, -self.coeffs, normalize=False)

    def __mul__(self, s: float) -> DiracChain:
        return DiracChain(self.n, self.k, self.points, self.coeffs * float(s))

    __rmul__ = __mul__

    def equals(self, other: DiracChain, atol: float = 0.0) -> bool:
        """Termwise comparison of normalized chains; points must match exactly."""
        if (self.n, self.k) != (other.n, other.k):
            return False
        diff = self - other
        return bool(np.all(np.abs(diff.coeffs) <= atol))

    def __repr__(self):
        return f"DiracChain(n={self.n}, k={self.k}, terms={len(self)})"


def _normalize_arrays(points: np.ndarray, coeffs: np.ndarray, snap: float | None = None, atol: float = 0.0):
    if points.shape[0] == 0:
        return points.copy(), coeffs.copy()
    if snap:
        points = np.round(points / snap) * snap
    # +0.0 turns -0.0 into 0.0 so that both collapse to one point
    points = points + 0.0
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    summed = np.zeros((uniq.shape[0], coeffs.shape[1]))
    np.add.at(summed, inverse, coeffs)
    keep = np.any(np.abs(summed) > atol, axis=1)
    return uniq[keep], summed[keep]


def normalize(chain: DiracChain, snap: float | None = None, atol: float = 0.0) -> DiracChain:
    """Merge coincident points, drop zero terms, sort points lexicographically.

    Args:
        snap: if given, round points to a grid of this spacing before merging.
            By default points merge only when bitwise equal.
        atol: terms whose coefficients are all at most ``atol`` in magnitude are dropped.
    """
    pts, cf = _normalize_arrays(np.array(chain.points), np.array(chain.coeffs), snap, atol)
    return DiracChain(chain.n, chain.k, pts, cf, normalize=False)


def support(chain: DiracChain) -> list[tuple[float, ...]]:
    return [tuple(p) for p in normalize(chain).points]


def mass_norm(chain: DiracChain) -> MassEstimate:
    """B^0 norm: sum of the masses of the k-elements."""
    chain = normalize(chain)
    n, k = chain.n, chain.k
    if chain.is_zero():
        return MassEstimate(0.0, 0.0)
    if k in (0, 1, n - 1, n):
        total = float(np.sum(np.sqrt(np.einsum("ij,ij->i", chain.coeffs, chain.coeffs))))
        return MassEstimate(total, total)
    out = MassEstimate(0.0, 0.0)
    for _, alpha in chain.terms:
        out = out + mass(alpha)
    return out


@dataclass(frozen=True, eq=False)
class DifferenceTerm:
    """Iterated difference Delta_sigma(p; alpha) along vectors u_1, ..., u_j.

    The j-fold difference is sum over S subset {1..j} of
    (-1)^(j - |S|) (p + sum_{i in S} u_i; alpha).
    """

    sigma: tuple[tuple[float, ...], ...]
    point: tuple[float, ...]
    alpha: MultiVector

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(tuple(float(x) for x in u) for u in self.sigma))
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))
        for u in self.sigma:
            if len(u) != self.alpha.n:
                raise DimensionError("difference vector dimension differs from the multivector's")
        if len(self.point) != self.alpha.n:
            raise DimensionError("point dimension differs from the multivector's")

    @property
    def order(self) -> int:
        return len(self.sigma)

    @property
    def sigma_norm(self) -> float:
        return float(np.prod([np.linalg.norm(u) for u in self.sigma])) if self.sigma else 1.0

    @property
    def cost(self) -> float:
        return self.sigma_norm * mass(self.alpha).upper

    def expansion(self) -> tuple[np.ndarray, np.ndarray]:
        """The 2^j points and signs of the expansion, before cancellation."""
        j = self.order
        p = np.array(self.point)
        u = np.array(self.sigma, dtype=float).reshape(j, len(self.point))
        pts, signs = [], []
        for mask in itertools.product((0, 1), repeat=j):
            m = np.array(mask, dtype=float)
            pts.append(p + (m @ u if j else 0.0))
            signs.append((-1.0) ** (j - int(m.sum())))
        return np.array(pts), np.array(signs)

    def expand(self) -> DiracChain:
        pts, signs = self.expansion()
        return DiracChain(self.alpha.n, self.alpha.k, pts, signs[:, None] * self.alpha.coeffs[None, :])

    def scaled(self, s: float) -> DifferenceTerm:
        return DifferenceTerm(self.sigma, self.point, self.alpha * s)


def expand(term: DifferenceTerm) -> DiracChain:
    return term.expand()


def inside(term: DifferenceTerm, domain: Domain | None) -> bool:
    """Whether the convex hull of the term's support lies in ``domain``.

    For convex domains it suffices to test the 2^j expansion points, which
    include every extreme point of the hull.
    """
    if domain is None:
        return True
    pts, _ = term.expansion()
    return bool(np.all(domain.contains(pts)))
