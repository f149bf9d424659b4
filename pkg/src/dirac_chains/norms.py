"""Pairing of chains with forms and the B^r norms of Dirac chains.

The B^r norm is an infimum over decompositions of a chain into difference
chains of order at most r.  On a finite lattice with a finite set of
difference vectors the infimum becomes an L1 minimization under equality
constraints, which :func:`lattice_decomposition` solves exactly.  Over all of
R^n the lattice value is an upper bound; duality against forms with known
B^r norms gives lower bounds.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chains import DiracChain, DifferenceTerm, inside, mass_norm, normalize
from .domains import Box, Domain, contains_all
from .errors import DimensionError, DomainError, GradeError, InfeasibleError
from .exterior import MultiVector, basis_multivectors, dim, mass
from .forms import Form, FormField, exact_br_norm
from .lp import l1_min


def pairing(chain: DiracChain, form: Form) -> float:
    """Integral pairing sum_i w(p_i)(alpha_i), summed in term order."""
    if chain.k != form.degree:
        raise GradeError(f"cannot pair a grade-{chain.k} chain with a degree-{form.degree} form")
    if chain.n != form.n:
        raise DimensionError(f"chain in R^{chain.n}, form on R^{form.n}")
    if chain.is_zero():
        return 0.0
    return math.fsum(form.evaluate_many(chain.points, chain.coeffs))


@dataclass(frozen=True)
class LatticeSpec:
    """Finite grid of base points with its allowed difference vectors.

    Points are ``origin + h * i`` for integer multi-indices ``0 <= i < shape``.
    Difference vectors are ``m * h * e_j`` for ``1 <= m <= max_multiple``;
    negative steps are redundant because generator coefficients are signed.

    Attributes:
        domain: set U that generators must stay inside (defaults to the
            lattice's bounding box).
        basis: grade-k multivectors used as alpha in generators; defaults to
            the standard basis.
    """

    origin: tuple[float, ...]
    h: float
    shape: tuple[int, ...]
    max_multiple: int = 1
    domain: Domain | None = None
    basis: tuple[MultiVector, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "shape", tuple(int(v) for v in self.shape))
        if len(self.origin) != len(self.shape):
            raise DimensionError("origin and shape lengths differ")
        if self.h <= 0:
            raise ValueError("lattice spacing must be positive")

    @classmethod
    def grid(cls, n: int, h: float, extent: float, origin=None, **kw) -> LatticeSpec:
        """Grid covering [origin, origin + extent]^n with spacing h."""
        steps = int(round(extent / h))
        origin = tuple(origin) if origin is not None else (0.0,) * n
        return cls(origin, h, (steps + 1,) * n, **kw)

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def region(self) -> Domain:
        if self.domain is not None:
            return self.domain
        o = np.array(self.origin)
        return Box(tuple(o), tuple(o + self.h * (np.array(self.shape) - 1)))

    def point(self, index) -> np.ndarray:
        return np.array(self.origin) + self.h * np.asarray(index, dtype=float)

    def points(self) -> np.ndarray:
        idx = np.array(list(np.ndindex(*self.shape)), dtype=float).reshape(-1, self.n)
        return np.array(self.origin) + self.h * idx

    def snap(self, points, tol: float = 1e-9) -> np.ndarray | None:
        """Integer indices of points on the lattice, or None if any point is off it."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        raw = (points - np.array(self.origin)) / self.h
        idx = np.rint(raw)
        if np.any(np.abs(raw - idx) > tol):
            return None
        idx = idx.astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.shape)):
            return None
        return idx

    def flat_index(self, idx: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(tuple(np.atleast_2d(idx).T), self.shape)

    def basis_for(self, k: int) -> tuple[MultiVector, ...]:
        if self.basis is not None:
            if any(b.k != k for b in self.basis):
                raise GradeError("lattice basis multivectors have the wrong grade")
            return self.basis
        return tuple(basis_multivectors(self.n, k))

    def steps(self) -> list[np.ndarray]:
        out = []
        for j in range(self.n):
            for m in range(1, self.max_multiple + 1):
                u = np.zeros(self.n)
                u[j] = m * self.h
                out.append(u)
        return out

    def generators(self, r: int, k: int) -> list[DifferenceTerm]:
        """All difference terms of order <= r that stay on the lattice and inside U."""
        region = self.region
        steps = self.steps()
        basis = self.basis_for(k)
        out = []
        for index in np.ndindex(*self.shape):
            p = self.point(index)
            for j in range(r + 1):
                for combo in itertools.combinations_with_replacement(range(len(steps)), j):
                    sigma = tuple(tuple(steps[c]) for c in combo)
                    reach = p + sum((steps[c] for c in combo), np.zeros(self.n))
                    if self.snap(reach) is None:
                        continue
                    for alpha in basis:
                        term = DifferenceTerm(sigma, tuple(p), alpha)
                        if inside(term, region):
                            out.append(term)
        return out


@dataclass(frozen=True)
class Decomposition:
    """A chain written as a weighted sum of difference terms."""

    terms: tuple[DifferenceTerm, ...]
    n: int
    k: int
    lp_iterations: int = 0
    method: str = "trivial"

    @property
    def total_cost(self) -> float:
        return math.fsum(t.cost for t in self.terms)

    def chain(self) -> DiracChain:
        out = DiracChain.zero(self.n, self.k)
        pts = [t.expand() for t in self.terms]
        if not pts:
            return out
        return DiracChain(self.n, self.k,
                          np.concatenate([c.points for c in pts]),
                          np.concatenate([c.coeffs for c in pts]))

    def residual(self, target: DiracChain, lattice: LatticeSpec | None = None) -> float:
        """Largest coefficient of (sum of expansions) - target."""
        snap = lattice.h * 1e-6 if lattice is not None else None
        diff = normalize(self.chain() - target, snap=snap)
        return float(np.max(np.abs(diff.coeffs))) if len(diff) else 0.0

    def all_inside(self, domain: Domain | None) -> bool:
        return all(inside(t, domain) for t in self.terms)

    def to_json(self) -> list[dict]:
        return [
            {"order": t.order, "sigma": [list(u) for u in t.sigma], "p": list(t.point),
             "alpha": t.alpha.to_dict(), "cost": t.cost}
            for t in self.terms
        ]


def trivial_decomposition(chain: DiracChain, domain: Domain | None = None) -> Decomposition:
    """Order-zero decomposition; its cost is the upper mass estimate."""
    chain = normalize(chain)
    if not contains_all(domain, chain.points):
        raise DomainError("chain support is not inside the domain")
    terms = tuple(DifferenceTerm((), p, a) for p, a in chain.terms)
    return Decomposition(terms, chain.n, chain.k)


def lattice_decomposition(chain: DiracChain, r: int, lattice: LatticeSpec, tol: float = 1e-10) -> Decomposition:
    """Cheapest decomposition of ``chain`` into lattice difference terms of order <= r.

    Raises:
        InfeasibleError: if the chain is not supported on lattice points or
            cannot be written with the allowed generators.
    """
    chain = normalize(chain)
    n, k = chain.n, chain.k
    if n != lattice.n:
        raise DimensionError(f"chain in R^{n}, lattice in R^{lattice.n}")
    if chain.is_zero():
        return Decomposition((), n, k, method="lattice-lp")
    target_idx = lattice.snap(chain.points)
    if target_idx is None:
        raise InfeasibleError("chain support is not contained in the lattice")
    if not contains_all(lattice.region, chain.points):
        raise InfeasibleError("chain support is not inside the lattice domain")

    gens = lattice.generators(r, k)
    if not gens:
        raise InfeasibleError("no generators fit inside the lattice domain")
    width = dim(n, k)
    rows: dict[int, int] = {}

    def row_ids(flat_points, width_idx):
        out = []
        for fp in flat_points:
            for c in width_idx:
                key = int(fp) * width + int(c)
                if key not in rows:
                    rows[key] = len(rows)
                out.append(rows[key])
        return out

    entries = []
    for col, g in enumerate(gens):
        pts, signs = g.expansion()
        flat = lattice.flat_index(lattice.snap(pts))
        nz = np.flatnonzero(g.alpha.coeffs)
        ids = row_ids(flat, nz)
        vals = (signs[:, None] * g.alpha.coeffs[None, nz]).reshape(-1)
        entries.extend((i, col, v) for i, v in zip(ids, vals))
    tflat = lattice.flat_index(target_idx)
    target_entries = []
    for fp, cf in zip(tflat, chain.coeffs):
        nz = np.flatnonzero(cf)
        for i, c in zip(row_ids([fp], nz), cf[nz]):
            target_entries.append((i, c))

    g_mat = np.zeros((len(rows), len(gens)))
    for i, j, v in entries:
        g_mat[i, j] += v
    target = np.zeros(len(rows))
    for i, c in target_entries:
        target[i] += c
    costs = np.array([g.cost for g in gens])
    res = l1_min(costs, g_mat, target, tol=tol)
    scale = max(1.0, float(np.max(np.abs(res.x))))
    terms = tuple(g.scaled(y) for g, y in zip(gens, res.x) if abs(y) > 1e-13 * scale)
    return Decomposition(terms, n, k, lp_iterations=res.nit, method="lattice-lp")


def br_norm_lattice(chain: DiracChain, r: int, lattice: LatticeSpec) -> float:
    """Exact B^r value within the lattice generator class (an LP optimum)."""
    return lattice_decomposition(chain, r, lattice).total_cost


def upper_decomposition(chain: DiracChain, r: int, domain: Domain | None = None,
                        lattice: LatticeSpec | None = None) -> Decomposition:
    """Best decomposition found: the lattice LP when it applies, else order zero."""
    best = trivial_decomposition(chain, domain)
    if lattice is not None and r > 0:
        lat = lattice if domain is None or lattice.domain is not None else _with_domain(lattice, domain)
        try:
            cand = lattice_decomposition(chain, r, lat)
        except InfeasibleError:
            cand = None
        if cand is not None and cand.total_cost < best.total_cost:
            best = cand
    return best


def _with_domain(lattice: LatticeSpec, domain: Domain) -> LatticeSpec:
    return LatticeSpec(lattice.origin, lattice.h, lattice.shape, lattice.max_multiple, domain, lattice.basis)


def br_upper(chain: DiracChain, r: int, domain: Domain | None = None, lattice: LatticeSpec | None = None) -> float:
    """Upper bound on ||chain||_{B^r} from an explicit decomposition inside the domain."""
    return upper_decomposition(chain, r, domain, lattice).total_cost


@dataclass(frozen=True)
class LowerBound:
    """Duality lower bound max |<chain, w>| / ||w||_{B^r} over a battery."""

    value: float
    status: str
    best_form: int | None = None
    ratios: tuple[float, ...] = field(default=())


def br_lower(chain: DiracChain, r: int, domain: Domain | None, battery: Sequence[FormField]) -> LowerBound:
    """Lower bound on ||chain||_{B^r} from forms with certified B^r norms."""
    if not battery:
        warnings.warn("empty battery: B^r lower bound defaults to 0", stacklevel=2)
        return LowerBound(0.0, "warning")
    ratios = []
    for form in battery:
        norm = exact_br_norm(form, r, domain).value
        ratios.append(abs(pairing(chain, form)) / norm if norm > 0 else 0.0)
    best = int(np.argmax(ratios))
    return LowerBound(float(ratios[best]), "ok", best, tuple(ratios))


@dataclass(frozen=True)
class NormSandwich:
    lower: LowerBound
    upper: Decomposition
    lp_value: float | None

    def to_json(self) -> dict:
        return {
            "lower": self.lower.value,
            "lower_status": self.lower.status,
            "upper": self.upper.total_cost,
            "lp_value": self.lp_value,
            "decomposition": self.upper.to_json(),
        }


def br_sandwich(chain: DiracChain, r: int, domain: Domain | None, battery: Sequence[FormField],
                lattice: LatticeSpec | None = None) -> NormSandwich:
    lower = br_lower(chain, r, domain, battery)
    lp_value = None
    if lattice is not None:
        try:
            lp_value = lattice_decomposition(chain, r, lattice).total_cost
        except InfeasibleError:
            lp_value = None
    return NormSandwich(lower, upper_decomposition(chain, r, domain, lattice), lp_value)


__all__ = [
    "pairing", "LatticeSpec", "Decomposition", "trivial_decomposition", "lattice_decomposition",
    "br_norm_lattice", "upper_decomposition", "br_upper", "br_lower", "LowerBound",
    "NormSandwich", "br_sandwich", "mass_norm", "mass",
]
