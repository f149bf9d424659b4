"""Finite-dimensional picture: operators on a fixed set of base points as dense matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .chains import DiracChain
from .errors import BasisSpanError, ComplexError, DimensionError, GradeError
from .exterior import basis_subsets, dim
from .norms import LatticeSpec
from .operators import boundary_h

RANK_REL_TOL = 1e-9


class ChainBasis:
    """Ordered basis of k-elements (p; e_I) over a lattice.

    Columns are ordered point-major: every allowed subset at the first point,
    then the next point, following the lattice's row-major point order.

    Args:
        lattice: base points.
        k: grade.
        cubical: if True, keep (p; e_I) only when p + h e_i stays on the
            lattice for every i in I, i.e. the oriented unit cubes of the
            lattice.  These span a subcomplex closed under the difference
            boundary with step h.  Otherwise all subsets at all points are kept.
    """

    def __init__(self, lattice: LatticeSpec, k: int, cubical: bool = False):
        if k < 0 or k > lattice.n:
            raise GradeError(f"grade {k} outside 0..{lattice.n}")
        self.lattice = lattice
        self.n = lattice.n
        self.k = k
        self.cubical = cubical
        subsets = basis_subsets(self.n, k)
        shape = np.array(lattice.shape)
        elements = []
        for index in np.ndindex(*lattice.shape):
            idx = np.array(index)
            for col, s in enumerate(subsets):
                if cubical and any(idx[i] + 1 >= shape[i] for i in s):
                    continue
                elements.append((index, col))
        self.elements = elements
        self._lookup = {e: j for j, e in enumerate(elements)}

    def __len__(self):
        return len(self.elements)

    @property
    def dimension(self) -> int:
        return len(self.elements)

    def chain(self, j: int, weight: float = 1.0) -> DiracChain:
        index, col = self.elements[j]
        cf = np.zeros((1, dim(self.n, self.k)))
        cf[0, col] = weight
        return DiracChain(self.n, self.k, self.lattice.point(index)[None, :], cf)

    def from_vector(self, vec) -> DiracChain:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (len(self),):
            raise DimensionError(f"vector of length {vec.size} for a basis of size {len(self)}")
        if not len(self):
            return DiracChain.zero(self.n, self.k)
        pts = np.array([self.lattice.point(e[0]) for e in self.elements])
        cf = np.zeros((len(self), dim(self.n, self.k)))
        cf[np.arange(len(self)), [e[1] for e in self.elements]] = vec
        return DiracChain(self.n, self.k, pts, cf)

    def to_vector(self, chain: DiracChain, atol: float = 0.0) -> np.ndarray:
        """Coordinates of a chain; raises BasisSpanError for terms outside the span."""
        if (chain.n, chain.k) != (self.n, self.k):
            raise GradeError(f"chain of grade {chain.k} in R^{chain.n} for a grade-{self.k} basis in R^{self.n}")
        out = np.zeros(len(self))
        escaping = []
        for p, c in zip(chain.points, chain.coeffs):
            idx = self.lattice.snap(p)
            for col in np.flatnonzero(np.abs(c) > atol):
                key = (tuple(int(v) for v in idx[0]), int(col)) if idx is not None else None
                j = self._lookup.get(key) if key is not None else None
                if j is None:
                    escaping.append((tuple(float(v) for v in p), int(col)))
                else:
                    out[j] += c[col]
        if escaping:
            raise BasisSpanError(f"{len(escaping)} terms lie outside the basis span", escaping)
        return out


def matrix_of(op: Callable[[DiracChain], DiracChain], b_in: ChainBasis, b_out: ChainBasis) -> np.ndarray:
    """Column j holds the coordinates of op applied to the j-th basis element."""
    mat = np.zeros((len(b_out), len(b_in)))
    for j in range(len(b_in)):
        mat[:, j] = b_out.to_vector(op(b_in.chain(j)))
    return mat


def boundary_matrix(lattice: LatticeSpec, k: int, cubical: bool = True) -> np.ndarray:
    """Difference boundary with step equal to the lattice spacing, grade k -> k-1."""
    b_in = ChainBasis(lattice, k, cubical)
    b_out = ChainBasis(lattice, k - 1, cubical)
    return matrix_of(lambda c: boundary_h(c, lattice.h), b_in, b_out)


def numerical_rank(mat: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Singular values at most rel_tol times the largest count as zero."""
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


@dataclass(frozen=True)
class ComplexDiagnostics:
    dims: dict[int, int]
    ranks: dict[int, int]
    kernels: dict[int, int]
    defects: dict[int, int]
    composition_max: dict[int, float]

    def to_json(self) -> dict:
        def keyed(d):
            return {str(k): v for k, v in sorted(d.items())}

        return {
            "dims": keyed(self.dims), "ranks": keyed(self.ranks), "kernels": keyed(self.kernels),
            "defects": keyed(self.defects), "composition_max": keyed(self.composition_max),
        }


def complex_diagnostics(boundaries: dict[int, np.ndarray], dims: dict[int, int] | None = None,
                        rel_tol: float = RANK_REL_TOL, comp_tol: float = 1e-8) -> ComplexDiagnostics:
    """Ranks, kernel dimensions and defects dim ker d_k - rank d_{k+1}.

    Args:
        boundaries: grade k -> matrix of d_k (rows grade k-1, columns grade k).
        dims: dimension of each grade; inferred from the matrix shapes if omitted.
    """
    dims = dict(dims or {})
    for k, mat in boundaries.items():
        dims.setdefault(k, mat.shape[1])
        dims.setdefault(k - 1, mat.shape[0])
    ranks = {k: numerical_rank(mat, rel_tol) for k, mat in boundaries.items()}
    comp = {}
    for k, mat in boundaries.items():
        if k + 1 in boundaries:
            upper = boundaries[k + 1]
            prod = mat @ upper
            scale = max(np.abs(mat).max(initial=0.0) * np.abs(upper).max(initial=0.0), 1.0)
            comp[k] = float(np.abs(prod).max(initial=0.0))
            if comp[k] > comp_tol * scale:
                raise ComplexError(f"d_{k} d_{k + 1} has entries up to {comp[k]:.3e}; step and lattice mismatch?")
    kernels = {k: dims[k] - ranks.get(k, 0) for k in dims}
    defects = {k: kernels[k] - ranks.get(k + 1, 0) for k in dims}
    return ComplexDiagnostics(dims, ranks, kernels, defects, comp)


def lattice_complex(lattice: LatticeSpec, cubical: bool = True) -> tuple[dict[int, np.ndarray], dict[int, int]]:
    """All boundary matrices of the lattice's (cubical) chain complex, with grade dimensions."""
    n = lattice.n
    mats = {k: boundary_matrix(lattice, k, cubical) for k in range(1, n + 1)}
    dims = {k: len(ChainBasis(lattice, k, cubical)) for k in range(n + 1)}
    return mats, dims


def apply_matrix(mat: np.ndarray, chain: DiracChain, b_in: ChainBasis, b_out: ChainBasis) -> DiracChain:
    return b_out.from_vector(mat @ b_in.to_vector(chain))


__all__: Sequence[str] = [
    "ChainBasis", "matrix_of", "boundary_matrix", "numerical_rank", "ComplexDiagnostics",
    "complex_diagnostics", "lattice_complex", "apply_matrix", "RANK_REL_TOL",
]
