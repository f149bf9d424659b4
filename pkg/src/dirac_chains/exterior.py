"""Exterior algebra of R^n over the lexicographic basis.

Multivectors are stored densely: a grade-k element of R^n carries
``binomial(n, k)`` coefficients ordered like ``itertools.combinations``.
Index sets are 0-based internally and 1-based in every text encoding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.stats

from .errors import DegenerateGradeError, DimensionError, GradeError

DEFAULT_ATOL = 1e-10


@lru_cache(maxsize=None)
def basis_subsets(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Lexicographically ordered k-subsets of {0, ..., n-1}."""
    if k < 0:
        return ()
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def subset_index(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {s: i for i, s in enumerate(basis_subsets(n, k))}


def dim(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


def merge_sign(a: Sequence[int], b: Sequence[int]) -> int:
    """Sign of the shuffle sorting the concatenation of disjoint ``a`` and ``b``."""
    inversions = sum(1 for i in a for j in b if i > j)
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def wedge_table(n: int, k: int, l: int):
    """Nonzero structure constants of the product grade k x grade l -> k+l.

    Returns integer arrays ``(ia, ib, out)`` and a float array ``sign`` such
    that ``e_I[ia] ^ e_J[ib] = sign * e_K[out]``.
    """
    rows = []
    out_index = subset_index(n, k + l)
    for i, s in enumerate(basis_subsets(n, k)):
        for j, t in enumerate(basis_subsets(n, l)):
            if set(s) & set(t):
                continue
            merged = tuple(sorted(s + t))
            rows.append((i, j, out_index[merged], merge_sign(s, t)))
    if not rows:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty, empty, np.zeros(0)
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3].astype(float)


def wedge_coeffs(a: np.ndarray, b: np.ndarray, n: int, k: int, l: int) -> np.ndarray:
    """Batched wedge of coefficient arrays (..., C(n,k)) and (..., C(n,l))."""
    ia, ib, out, sign = wedge_table(n, k, l)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    res = np.zeros(shape + (dim(n, k + l),))
    if len(out):
        contrib = sign * a[..., ia] * b[..., ib]
        # explicit loop over output slots keeps the summation order fixed
        for slot in range(res.shape[-1]):
            mask = out == slot
            res[..., slot] = contrib[..., mask].sum(axis=-1)
    return res


@lru_cache(maxsize=None)
def _compound_indices(m: int, n: int, k: int):
    rows = np.array(basis_subsets(m, k), dtype=np.intp).reshape(-1, k)
    cols = np.array(basis_subsets(n, k), dtype=np.intp).reshape(-1, k)
    return rows, cols


def compound_matrix(mat: np.ndarray, k: int) -> np.ndarray:
    """k-th compound (matrix of k x k minors) of a stack of m x n matrices.

    This is the matrix of the induced map on grade-k multivectors in the
    lexicographic bases, so ``compound_matrix(D, k) @ alpha`` pushes alpha
    forward through the linear map D.
    """
    mat = np.asarray(mat, dtype=float)
    *batch, m, n = mat.shape
    if k == 0:
        return np.ones(tuple(batch) + (1, 1))
    if k > m or k > n:
        return np.zeros(tuple(batch) + (dim(m, k), dim(n, k)))
    rows, cols = _compound_indices(m, n, k)
    sub = mat[..., rows[:, None, :, None], cols[None, :, None, :]]
    if k == 1:
        return sub[..., 0, 0]
    # exactly singular minors come back as 0 with a spurious LU warning
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.linalg.det(sub)


@dataclass(frozen=True, eq=False)
class MultiVector:
    """A grade-k element of the exterior algebra of R^n.

    Attributes:
        n: ambient dimension.
        k: grade, 0 <= k <= n.
        coeffs: read-only array of length binomial(n, k).
    """

    n: int
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"ambient dimension must be positive, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise DegenerateGradeError(f"grade {self.k} is not in [0, {self.n}]")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape[0] != dim(self.n, self.k):
            raise DimensionError(
                f"expected {dim(self.n, self.k)} coefficients for grade {self.k} in R^{self.n}, "
                f"got {c.shape[0]}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int, k: int) -> MultiVector:
        return cls(n, k, np.zeros(dim(n, k)))

    @classmethod
    def scalar(cls, n: int, value: float = 1.0) -> MultiVector:
        return cls(n, 0, [value])

    @classmethod
    def basis(cls, n: int, *indices: int) -> MultiVector:
        """Basis element e_{i1...ik}; indices are 1-based and need not be sorted."""
        idx = [i - 1 for i in indices]
        if len(set(idx)) != len(idx):
            return cls.zero(n, len(idx))
        order = sorted(range(len(idx)), key=lambda j: idx[j])
        perm_sign = _permutation_sign(order)
        c = np.zeros(dim(n, len(idx)))
        c[subset_index(n, len(idx))[tuple(sorted(idx))]] = perm_sign
        return cls(n, len(idx), c)

    @classmethod
    def vector(cls, v: Sequence[float]) -> MultiVector:
        v = np.asarray(v, dtype=float)
        return cls(v.shape[0], 1, v)

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float]], n: int | None = None) -> MultiVector:
        """Simple multivector v_1 ^ ... ^ v_k, computed from k x k minors."""
        vs = np.asarray(vectors, dtype=float)
        if vs.size == 0:
            if n is None:
                raise DimensionError("ambient dimension needed for an empty wedge")
            return cls.scalar(n)
        vs = vs.reshape(len(vectors), -1)
        k, n = vs.shape
        return cls(n, k, compound_matrix(vs.T, k)[:, 0])

    @classmethod
    def from_dict(cls, n: int, k: int, coeffs: dict) -> MultiVector:
        """Build from ``{(i1, ..., ik): value}`` or ``{"i1,...,ik": value}``, 1-based."""
        out = np.zeros(dim(n, k))
        index = subset_index(n, k)
        for key, value in coeffs.items():
            if isinstance(key, str):
                key = tuple(int(s) for s in key.split(",") if s.strip())
            elif isinstance(key, int):
                key = (key,)
            if len(key) != k:
                raise GradeError(f"index {key} does not have {k} entries")
            idx = [i - 1 for i in key]
            if min(idx, default=0) < 0 or max(idx, default=0) >= n:
                raise DimensionError(f"index {key} out of range for R^{n}")
            if len(set(idx)) != len(idx):
                continue
            order = sorted(range(k), key=lambda j: idx[j])
            out[index[tuple(sorted(idx))]] += _permutation_sign(order) * float(value)
        return cls(n, k, out)

    def to_dict(self) -> dict[str, float]:
        return {
            ",".join(str(i + 1) for i in s): float(c)
            for s, c in zip(basis_subsets(self.n, self.k), self.coeffs)
            if c != 0.0
        }

    def norm(self) -> float:
        """Euclidean norm of the coefficients, sqrt(<a, a>)."""
        return float(np.sqrt(np.dot(self.coeffs, self.coeffs)))

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= atol))

    def isclose(self, other: MultiVector, atol: float = DEFAULT_ATOL) -> bool:
        _check_same_space(self, other)
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= atol))

    def __add__(self, other: MultiVector) -> MultiVector:
        _check_same_space(self, other)
        return MultiVector(self.n, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other: MultiVector) -> MultiVector:
        _check_same_space(self, other)
        return MultiVector(self.n, self.k, self.coeffs - other.coeffs)

    def __neg__(self) -> MultiVector:
        return MultiVector(self.n, self.k, -self.coeffs)

    def __mul__(self, s: float) -> MultiVector:
        return MultiVector(self.n, self.k, self.coeffs * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> MultiVector:
        return MultiVector(self.n, self.k, self.coeffs / float(s))

    def __xor__(self, other: MultiVector) -> MultiVector:
        return wedge(self, other)

    def __repr__(self):
        if self.is_zero():
            return f"MultiVector(n={self.n}, k={self.k}, 0)"
        parts = []
        for s, c in zip(basis_subsets(self.n, self.k), self.coeffs):
            if c != 0.0:
                name = "e" + "".join(str(i + 1) for i in s) if s else "1"
                parts.append(f"{c:g}*{name}")
        return f"MultiVector(n={self.n}, k={self.k}, {' + '.join(parts)})"


def _permutation_sign(order: Sequence[int]) -> int:
    inversions = sum(1 for a, b in itertools.combinations(order, 2) if a > b)
    return -1 if inversions % 2 else 1


def _check_same_space(a: MultiVector, b: MultiVector):
    if a.n != b.n:
        raise DimensionError(f"ambient dimensions differ: {a.n} vs {b.n}")
    if a.k != b.k:
        raise GradeError(f"grades differ: {a.k} vs {b.k}")


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    """Exterior product a ^ b.

    Raises:
        DimensionError: if the ambient dimensions differ.
        DegenerateGradeError: if grade(a) + grade(b) exceeds n.
    """
    if a.n != b.n:
        raise DimensionError(f"ambient dimensions differ: {a.n} vs {b.n}")
    if a.k + b.k > a.n:
        raise DegenerateGradeError(
            f"grade {a.k} ^ grade {b.k} exceeds ambient dimension {a.n}; the product is zero"
        )
    return MultiVector(a.n, a.k + b.k, wedge_coeffs(a.coeffs, b.coeffs, a.n, a.k, b.k))


def inner(a: MultiVector, b: MultiVector) -> float:
    """Euclidean inner product induced on grade-k multivectors.

    On simple arguments this is the Gram determinant det(<u_i, v_j>).
    """
    _check_same_space(a, b)
    return float(np.dot(a.coeffs, b.coeffs))


def hodge_star(a: MultiVector) -> MultiVector:
    """Hodge dual with e_I ^ *e_I = e_{1..n}; an isometry sending simple to simple."""
    n, k = a.n, a.k
    out = np.zeros(dim(n, n - k))
    index = subset_index(n, n - k)
    full = set(range(n))
    for s, c in zip(basis_subsets(n, k), a.coeffs):
        comp = tuple(sorted(full - set(s)))
        out[index[comp]] = merge_sign(s, comp) * c
    return MultiVector(n, n - k, out)


def is_simple(a: MultiVector, atol: float = DEFAULT_ATOL) -> bool:
    """Whether ``a`` is decomposable as a wedge of vectors.

    Grades 0, 1, n-1 and n are always simple.  Grade 2 uses the test
    a ^ a = 0.  Other grades use the annihilator criterion: a nonzero
    k-vector is simple exactly when {v : v ^ a = 0} has dimension k.
    """
    n, k = a.n, a.k
    if k in (0, 1, n - 1, n) or a.is_zero(atol):
        return True
    if k == 2:
        return bool(np.max(np.abs(wedge_coeffs(a.coeffs, a.coeffs, n, 2, 2))) <= atol)
    basis_vectors = np.eye(n)
    columns = [wedge_coeffs(basis_vectors[i], a.coeffs, n, 1, k) for i in range(n)]
    sv = np.linalg.svd(np.stack(columns, axis=1), compute_uv=False)
    nullity = n - int(np.sum(sv > atol * max(1.0, a.norm())))
    return nullity == k


@dataclass(frozen=True)
class MassEstimate:
    """Certified bracket lower <= mass <= upper."""

    lower: float
    upper: float

    @property
    def exact(self) -> bool:
        return self.upper - self.lower <= 1e-12 * max(1.0, self.upper)

    def __add__(self, other: MassEstimate) -> MassEstimate:
        return MassEstimate(self.lower + other.lower, self.upper + other.upper)

    def __iter__(self):
        return iter((self.lower, self.upper))


@dataclass(frozen=True)
class MassCertificate:
    """Evidence behind a mass estimate.

    Attributes:
        estimate: the bracket.
        pieces: simple multivectors summing to the input (up to ``residual``);
            the sum of their norms plus the residual's basis-L1 norm is the upper bound.
        witness: a covector (same coefficient layout) of comass at most one,
            or None when the lower bound is the Euclidean norm.
        residual: input minus the sum of pieces.
    """

    estimate: MassEstimate
    pieces: tuple[MultiVector, ...]
    witness: MultiVector | None
    residual: MultiVector


def mass(a: MultiVector, atol: float = DEFAULT_ATOL) -> MassEstimate:
    """Mass of a k-vector as a certified bracket."""
    return mass_certificate(a, atol=atol).estimate


def mass_certificate(a: MultiVector, atol: float = DEFAULT_ATOL, restarts: int = 0) -> MassCertificate:
    n, k = a.n, a.k
    zero = MultiVector.zero(n, k)
    if a.is_zero() or a.norm() == 0.0:
        return MassCertificate(MassEstimate(0.0, 0.0), (), None, zero)
    if k in (0, 1, n - 1, n):
        e = a.norm()
        return MassCertificate(MassEstimate(e, e), (a,), a / e, zero)
    if k == 2:
        return _mass_grade_two(a)
    if k == n - 2:
        dual = _mass_grade_two(hodge_star(a))
        # star is an isometry on simple multivectors and on covectors of comass <= 1
        back = _inverse_star
        return MassCertificate(
            dual.estimate,
            tuple(back(p) for p in dual.pieces),
            back(dual.witness) if dual.witness is not None else None,
            back(dual.residual),
        )
    if is_simple(a, atol):
        e = a.norm()
        return MassCertificate(MassEstimate(e, e), (a,), a / e, zero)
    return _mass_search(a, restarts)


def _inverse_star(a: MultiVector) -> MultiVector:
    # ** = (-1)^{k(n-k)} on grade k
    s = hodge_star(a)
    return s if (a.k * (a.n - a.k)) % 2 == 0 else -s


def _skew_matrix(a: MultiVector) -> np.ndarray:
    n = a.n
    s = np.zeros((n, n))
    for (i, j), c in zip(basis_subsets(n, 2), a.coeffs):
        s[i, j] = c
        s[j, i] = -c
    return s


def _mass_grade_two(a: MultiVector) -> MassCertificate:
    # Normal form of the skew matrix: a = sum_j b_j q_{2j} ^ q_{2j+1} with
    # orthonormal q.  The matching Kaehler-type covector has comass 1
    # (Wirtinger), so it certifies sum |b_j| from below.
    n = a.n
    t, q = scipy.linalg.schur(_skew_matrix(a), output="real")
    pieces = []
    witness = np.zeros(dim(n, 2))
    i = 0
    while i < n - 1:
        b = t[i, i + 1]
        if abs(b) > 0.0 and abs(t[i + 1, i]) > 0.0:
            piece = MultiVector.from_vectors([q[:, i], q[:, i + 1]]) * b
            pieces.append(piece)
            witness += np.sign(b) * MultiVector.from_vectors([q[:, i], q[:, i + 1]]).coeffs
            i += 2
        else:
            i += 1
    total = MultiVector.zero(n, 2)
    for p in pieces:
        total = total + p
    residual = a - total
    upper = sum(p.norm() for p in pieces) + float(np.sum(np.abs(residual.coeffs)))
    w = MultiVector(n, 2, witness)
    lower = min(abs(inner(w, a)), upper) if pieces else a.norm()
    lower = max(lower, min(a.norm(), upper))
    return MassCertificate(MassEstimate(lower, upper), tuple(pieces), w if pieces else None, residual)


def _rotated_l1(a: MultiVector, q: np.ndarray) -> float:
    return float(np.sum(np.abs(compound_matrix(q.T, a.k) @ a.coeffs)))


def _mass_search(a: MultiVector, restarts: int) -> MassCertificate:
    # Upper bound: the L1 norm of the coefficients in any orthonormal frame
    # (each rotated basis blade is a unit simple k-vector).  Lower bound: the
    # Euclidean norm, which never exceeds mass.
    n, k = a.n, a.k
    rng = np.random.default_rng(0)
    best_q = np.eye(n)
    best = _rotated_l1(a, best_q)

    def objective(params, base):
        skew = np.zeros((n, n))
        skew[np.triu_indices(n, 1)] = params
        q = base @ scipy.linalg.expm(skew - skew.T)
        return _rotated_l1(a, q)

    starts = [np.eye(n)] + [scipy.stats.special_ortho_group.rvs(n, random_state=rng) for _ in range(restarts)]
    for base in starts:
        res = scipy.optimize.minimize(
            objective, np.zeros(n * (n - 1) // 2), args=(base,), method="Powell",
            options={"maxiter": 1000, "xtol": 1e-8, "ftol": 1e-10},
        )
        if res.fun < best:
            skew = np.zeros((n, n))
            skew[np.triu_indices(n, 1)] = res.x
            best_q = base @ scipy.linalg.expm(skew - skew.T)
            best = _rotated_l1(a, best_q)
    rotated = compound_matrix(best_q.T, k) @ a.coeffs
    blades = [MultiVector.from_vectors(best_q[:, list(s)].T) for s in basis_subsets(n, k)]
    pieces = tuple(b * c for b, c in zip(blades, rotated) if c != 0.0)
    total = MultiVector.zero(n, k)
    for p in pieces:
        total = total + p
    residual = a - total
    upper = sum(p.norm() for p in pieces) + float(np.sum(np.abs(residual.coeffs)))
    lower = min(a.norm(), upper)
    return MassCertificate(MassEstimate(lower, upper), pieces, None, residual)


def basis_multivectors(n: int, k: int) -> list[MultiVector]:
    out = []
    for i in range(dim(n, k)):
        c = np.zeros(dim(n, k))
        c[i] = 1.0
        out.append(MultiVector(n, k, c))
    return out


def wedge_all(items: Iterable[MultiVector]) -> MultiVector:
    items = list(items)
    out = items[0]
    for b in items[1:]:
        out = wedge(out, b)
    return out
