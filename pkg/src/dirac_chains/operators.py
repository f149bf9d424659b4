"""Operators on Dirac chains: boundary, extrusion, multiplication, pushforward,
Cartesian wedge product, and chain representatives of intervals and cells."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .chains import DiracChain
from .domains import Domain, contains_all
from .errors import (
    DegenerateCellError,
    DimensionError,
    DomainError,
    GradeError,
    ImageEscapeError,
    SimplicityError,
)
from .exterior import (
    MultiVector,
    basis_subsets,
    compound_matrix,
    dim,
    is_simple,
    subset_index,
    wedge_coeffs,
)
from .forms import FormField

DEFAULT_H = 1e-3


def boundary_h(chain: DiracChain, h: float = DEFAULT_H, domain: Domain | None = None) -> DiracChain:
    """Difference-quotient boundary.

    A basis element (p; e_{i_1} ^ ... ^ e_{i_k}) maps to
    sum_m (-1)^(m-1) / h [(p + h e_{i_m}; e_{I without i_m}) - (p; e_{I without i_m})],
    extended linearly.  When ``domain`` is given and p + h e_i falls outside
    it, the backward difference (p) - (p - h e_i) is used instead, so the
    support stays inside the domain.

    Grade-0 chains map to the zero chain.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    n, k = chain.n, chain.k
    if k == 0 or chain.degenerate:
        return DiracChain.zero(n, 0)
    pts = chain.points
    out_pts, out_cf = [], []
    lower = subset_index(n, k - 1)
    for col, s in enumerate(basis_subsets(n, k)):
        c = chain.coeffs[:, col]
        rows = np.flatnonzero(c)
        if rows.size == 0:
            continue
        p = pts[rows]
        for m, i in enumerate(s):
            target = lower[s[:m] + s[m + 1:]]
            weight = (-1) ** m * c[rows] / h
            shift = np.zeros(n)
            shift[i] = h
            fwd = p + shift
            base = p
            if domain is not None:
                outside = ~domain.contains(fwd)
                if np.any(outside):
                    fwd = np.where(outside[:, None], p, fwd)
                    base = np.where(outside[:, None], p - shift, p)
            cf = np.zeros((rows.size, dim(n, k - 1)))
            cf[:, target] = weight
            out_pts += [fwd, base]
            out_cf += [cf, -cf]
    if not out_pts:
        return DiracChain.zero(n, k - 1)
    return DiracChain(n, k - 1, np.concatenate(out_pts), np.concatenate(out_cf))


def extrusion(beta: MultiVector, chain: DiracChain) -> DiracChain:
    """E_beta: termwise (p; beta ^ alpha).

    Grade overflow gives the empty chain of grade k + s (``degenerate`` set).
    """
    if beta.n != chain.n:
        raise DimensionError("multivector and chain live in different dimensions")
    if not is_simple(beta):
        raise SimplicityError("extrusion is defined for simple multivectors")
    n, k, s = chain.n, chain.k, beta.k
    if k + s > n or chain.is_zero():
        return DiracChain.zero(n, k + s)
    cf = wedge_coeffs(beta.coeffs[None, :], chain.coeffs, n, s, k)
    return DiracChain(n, k + s, chain.points, cf)


def multiply(f, chain: DiracChain) -> DiracChain:
    """m_f: termwise (p; f(p) alpha) for a 0-form (or constant, or callable)."""
    if chain.is_zero():
        return chain
    if isinstance(f, FormField):
        if f.degree != 0:
            raise GradeError("multiplication needs a 0-form")
        if not contains_all(f.domain, chain.points):
            raise DomainError("chain support escapes the function's domain")
        values = f.coefficient_values(chain.points)[:, 0]
    elif callable(f):
        values = np.asarray(f(chain.points), dtype=float).reshape(-1)
    else:
        values = np.full(len(chain), float(f))
    return DiracChain(chain.n, chain.k, chain.points, values[:, None] * chain.coeffs)


def pushforward(mapping, chain: DiracChain, codomain: Domain | None = None) -> DiracChain:
    """F_*: termwise (F(p); Lambda^k DF_p alpha) through the k-th compound of the Jacobian."""
    if chain.n != mapping.n_in:
        raise DimensionError(f"chain in R^{chain.n}, map defined on R^{mapping.n_in}")
    m, k = mapping.n_out, chain.k
    if chain.is_zero() or k > m:
        return DiracChain.zero(m, k)
    image = mapping.evaluate(chain.points)
    if codomain is not None and not contains_all(codomain, image):
        raise ImageEscapeError("pushforward image leaves the codomain")
    comp = compound_matrix(mapping.jacobian(chain.points), k)
    cf = np.einsum("mij,mj->mi", comp, chain.coeffs)
    return DiracChain(m, k, image, cf)


@lru_cache(maxsize=None)
def _product_index(n: int, k: int, m: int, l: int) -> np.ndarray:
    target = subset_index(n + m, k + l)
    out = np.empty((dim(n, k), dim(m, l)), dtype=np.intp)
    for i, s in enumerate(basis_subsets(n, k)):
        for j, t in enumerate(basis_subsets(m, l)):
            out[i, j] = target[s + tuple(x + n for x in t)]
    return out


def cartesian_wedge(p: DiracChain, q: DiracChain) -> DiracChain:
    """P x Q in R^{n+m}: ((p, q); iota_1* alpha ^ iota_2* beta), bilinear over term pairs."""
    n, k, m, l = p.n, p.k, q.n, q.k
    if p.is_zero() or q.is_zero() or k > n or l > m:
        return DiracChain.zero(n + m, k + l)
    a, b = len(p), len(q)
    pts = np.concatenate([np.repeat(p.points, b, axis=0), np.tile(q.points, (a, 1))], axis=1)
    outer = np.einsum("ai,bj->abij", p.coeffs, q.coeffs).reshape(a * b, -1)
    cf = np.zeros((a * b, dim(n + m, k + l)))
    cf[:, _product_index(n, k, m, l).reshape(-1)] = outer
    return DiracChain(n + m, k + l, pts, cf)


def interval_chain(N: int, a: float = 0.0, b: float = 1.0) -> DiracChain:
    """Midpoint representative of the oriented interval [a, b] in R^1."""
    if N < 1:
        raise ValueError("N must be at least 1")
    width = (b - a) / N
    pts = a + (np.arange(1, N + 1) - 0.5) * width
    return DiracChain(1, 1, pts[:, None], np.full((N, 1), width))


@dataclass(frozen=True)
class AffineCell:
    """Oriented affine k-cell {vertex + sum s_i edges_i : s in [0,1]^k}."""

    vertex: tuple[float, ...]
    edges: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertex", tuple(float(v) for v in self.vertex))
        object.__setattr__(self, "edges", tuple(tuple(float(v) for v in e) for e in self.edges))
        if any(len(e) != len(self.vertex) for e in self.edges):
            raise DimensionError("edge vectors and vertex have different dimensions")

    @property
    def n(self) -> int:
        return len(self.vertex)

    @property
    def k(self) -> int:
        return len(self.edges)

    def orientation(self) -> MultiVector:
        return MultiVector.from_vectors(self.edges, n=self.n) if self.edges else MultiVector.scalar(self.n)

    def check(self):
        if self.k and np.linalg.matrix_rank(np.array(self.edges)) < self.k:
            raise DegenerateCellError(f"edges {self.edges} are linearly dependent")

    @classmethod
    def unit_cube(cls, n: int) -> AffineCell:
        return cls((0.0,) * n, tuple(tuple(row) for row in np.eye(n)))

    @classmethod
    def from_json(cls, obj) -> AffineCell:
        return cls(tuple(obj["vertex"]), tuple(tuple(e) for e in obj.get("edges", [])))

    def to_json(self) -> dict:
        return {"vertex": list(self.vertex), "edges": [list(e) for e in self.edges]}


def cell_chain(cell: AffineCell, N: int) -> DiracChain:
    """Midpoint product-rule representative of an affine cell with N^k subcells."""
    cell.check()
    if N < 1:
        raise ValueError("N must be at least 1")
    k, n = cell.k, cell.n
    alpha = cell.orientation()
    if k == 0:
        return DiracChain.element(cell.vertex, alpha)
    mids = (np.arange(1, N + 1) - 0.5) / N
    grid = np.array(list(itertools.product(mids, repeat=k)))
    pts = np.array(cell.vertex) + grid @ np.array(cell.edges)
    cf = np.tile(alpha.coeffs / N ** k, (grid.shape[0], 1))
    return DiracChain(n, k, pts, cf)


def cell_boundary(cell: AffineCell) -> list[tuple[int, AffineCell]]:
    """Oriented faces: (-1)^(i-1) for s_i = 1 and (-1)^i for s_i = 0."""
    cell.check()
    out = []
    v = np.array(cell.vertex)
    for i, e in enumerate(cell.edges):
        rest = cell.edges[:i] + cell.edges[i + 1:]
        sign = (-1) ** i
        out.append((sign, AffineCell(tuple(v + np.array(e)), rest)))
        out.append((-sign, AffineCell(tuple(v), rest)))
    return out


def cell_boundary_chain(cell: AffineCell, N: int) -> DiracChain:
    """Sum of the face representatives with their orientation signs."""
    faces = cell_boundary(cell)
    total = DiracChain.zero(cell.n, cell.k - 1)
    for sign, face in faces:
        total = total + sign * cell_chain(face, N)
    return total


def polygon_chain(vertices: Sequence[Sequence[float]], closed: bool = True) -> DiracChain:
    """Midpoint representative of a polygonal path: (midpoint; edge vector) per segment."""
    v = np.asarray(vertices, dtype=float)
    nxt = np.roll(v, -1, axis=0) if closed else v[1:]
    start = v if closed else v[:-1]
    return DiracChain(v.shape[1], 1, (start + nxt) / 2, nxt - start)


def circle_chain(M: int, center=(0.0, 0.0), radius: float = 1.0) -> DiracChain:
    """Counterclockwise inscribed regular M-gon as a Dirac 1-chain."""
    theta = 2 * np.pi * np.arange(M) / M
    verts = np.array(center) + radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return polygon_chain(verts)


def square_boundary_chain(M: int, lo=(0.0, 0.0), side: float = 1.0) -> DiracChain:
    """Counterclockwise boundary of an axis-aligned square, M segments per side."""
    lo = np.asarray(lo, dtype=float)
    t = np.arange(M) / M
    corners = [lo, lo + [side, 0], lo + [side, side], lo + [0, side]]
    verts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        verts.extend(a + np.outer(t, b - a))
    return polygon_chain(verts)


Operator = Callable[[DiracChain], DiracChain]
