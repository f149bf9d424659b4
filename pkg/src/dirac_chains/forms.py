"""Differential forms with symbolic coefficients, and evaluable form wrappers.

Every form here can be evaluated on batches of k-elements through
``evaluate_many(points, coeffs)``; only :class:`FormField` also carries
coefficient expressions (and hence exact d, interior products and B^r norms).
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import sympy as sp

from .domains import Box, Domain, contains_all, domain_from_json
from .errors import DimensionError, DomainError, GradeError, SimplicityError, UnsupportedExpressionError
from .exterior import MultiVector, basis_subsets, compound_matrix, dim, is_simple, subset_index, wedge_coeffs
from .expressions import (
    check_supported,
    default_variables,
    from_prefix,
    lambdify_many,
    maximize_over_box,
    symbols,
    to_expr,
    to_prefix,
)


class Form:
    """Anything that evaluates on k-elements (p; alpha), linearly in alpha."""

    n: int
    degree: int

    def evaluate_many(self, points, coeffs) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, point, alpha: MultiVector) -> float:
        if alpha.k != self.degree:
            raise GradeError(f"form of degree {self.degree} evaluated on a grade-{alpha.k} multivector")
        return float(self.evaluate_many(np.asarray(point, dtype=float)[None, :], alpha.coeffs[None, :])[0])

    def _check_args(self, points, coeffs):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        coeffs = np.asarray(coeffs, dtype=float).reshape(points.shape[0], dim(self.n, self.degree))
        if points.shape[1] != self.n:
            raise DimensionError(f"points in R^{points.shape[1]} for a form on R^{self.n}")
        return points, coeffs

    def __neg__(self):
        return ScaledForm(self, -1.0)

    def __mul__(self, s: float):
        return ScaledForm(self, float(s))

    __rmul__ = __mul__

    def __add__(self, other: Form):
        return SumForm(self, other)

    def __sub__(self, other: Form):
        return SumForm(self, ScaledForm(other, -1.0))


class FormField(Form):
    """Degree-k form on R^n with one coefficient expression per k-subset.

    Args:
        n: ambient dimension.
        degree: form degree k.
        coefficients: a sequence of binomial(n, k) expressions in
            lexicographic order, or a mapping from 1-based index tuples
            (or strings like ``"1,2"``) to expressions.
        domain: optional box or ball; evaluation outside raises DomainError.
        variables: coordinate names, default x, y, z (or x1..xn).
    """

    def __init__(self, n: int, degree: int, coefficients, domain: Domain | None = None,
                 variables: Sequence[str] | None = None, degenerate: bool = False):
        self.n = int(n)
        self.degree = int(degree)
        self.variables = tuple(variables or default_variables(n))
        if len(self.variables) != self.n:
            raise DimensionError(f"{len(self.variables)} variable names for R^{n}")
        size = dim(self.n, self.degree)
        coeffs = [sp.Integer(0)] * size
        if isinstance(coefficients, dict):
            index = subset_index(self.n, self.degree)
            for key, value in coefficients.items():
                key = _parse_key(key)
                if len(key) != self.degree:
                    raise GradeError(f"index {key} for a degree-{self.degree} form")
                idx = [i - 1 for i in key]
                order = sorted(range(len(idx)), key=lambda j: idx[j])
                sign = _perm_sign(order)
                coeffs[index[tuple(sorted(idx))]] += sign * to_expr(value, self.variables)
        else:
            coefficients = list(coefficients)
            if len(coefficients) != size:
                raise DimensionError(f"expected {size} coefficients, got {len(coefficients)}")
            coeffs = [to_expr(c, self.variables) for c in coefficients]
        for c in coeffs:
            check_supported(c)
        self.coefficients = tuple(coeffs)
        self.domain = domain
        self.degenerate = degenerate
        self._norm_cache = {}

    @classmethod
    def zero(cls, n: int, degree: int, domain=None, variables=None) -> FormField:
        return cls(n, degree, [0] * dim(n, degree), domain, variables)

    @classmethod
    def parse(cls, text: str, n: int | None = None, variables: Sequence[str] | None = None,
              domain: Domain | None = None) -> FormField:
        """Parse forms written like ``"x dy - y dx"`` or ``"x^2 dx^dy"``.

        Differentials are ``d<var>`` tokens, joined by juxtaposition, ``^``, ``*``
        or the wedge sign; everything else in a term is its coefficient.
        """
        if variables is None:
            variables = default_variables(n or 2)
        variables = tuple(variables)
        n = len(variables)
        dpat = re.compile(r"\bd(" + "|".join(sorted(map(re.escape, variables), key=len, reverse=True)) + r")\b")
        pieces: dict[tuple[int, ...], sp.Expr] = {}
        degree = None
        for sign, term in _split_terms(text):
            for match in dpat.finditer(term):
                head = term[:match.start()]
                if head.count("(") != head.count(")"):
                    raise UnsupportedExpressionError(
                        f"differentials inside parentheses are not supported: {term!r}")
            names = dpat.findall(term)
            coeff_text = re.sub(r"\s*[\*\^∧]?\s*@", "", dpat.sub("@", term)).strip()
            coeff_text = coeff_text.lstrip("*^∧ ").strip() or "1"
            idx = [variables.index(v) for v in names]
            if degree is None:
                degree = len(idx)
            elif degree != len(idx):
                raise GradeError(f"mixed degrees in form {text!r}")
            if len(set(idx)) != len(idx):
                continue
            order = sorted(range(len(idx)), key=lambda j: idx[j])
            key = tuple(sorted(idx))
            expr = sign * _perm_sign(order) * to_expr(coeff_text, variables)
            pieces[key] = pieces.get(key, sp.Integer(0)) + expr
        if degree is None:
            raise ValueError(f"empty form {text!r}")
        coeffs = [0] * dim(n, degree)
        index = subset_index(n, degree)
        for key, expr in pieces.items():
            coeffs[index[key]] = sp.expand(expr)
        return cls(n, degree, coeffs, domain, variables)

    @classmethod
    def from_json(cls, obj: dict) -> FormField:
        domain = domain_from_json(obj.get("domain"))
        variables = obj.get("variables")
        if "text" in obj:
            return cls.parse(obj["text"], n=obj.get("n"), variables=variables, domain=domain)
        n = obj["n"]
        variables = tuple(variables or default_variables(n))
        coeffs = {k: (from_prefix(v, variables) if isinstance(v, list) else v)
                  for k, v in obj["coefficients"].items()}
        return cls(n, obj["degree"], coeffs, domain, variables)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "degree": self.degree,
            "variables": list(self.variables),
            "coefficients": {
                ",".join(str(i + 1) for i in s): to_prefix(c)
                for s, c in zip(basis_subsets(self.n, self.degree), self.coefficients)
                if c != 0
            },
        }
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        return out

    def with_domain(self, domain: Domain | None) -> FormField:
        return FormField(self.n, self.degree, self.coefficients, domain, self.variables)

    @property
    def symbols(self):
        return symbols(self.variables)

    @cached_property
    def _eval(self):
        return lambdify_many(self.coefficients, self.variables)

    def coefficient_values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not contains_all(self.domain, points):
            bad = points[~self.domain.contains(points)][0]
            raise DomainError(f"point {bad.tolist()} lies outside the form's domain")
        return self._eval(points)

    def evaluate_many(self, points, coeffs) -> np.ndarray:
        points, coeffs = self._check_args(points, coeffs)
        if points.shape[0] == 0:
            return np.zeros(0)
        return np.einsum("ij,ij->i", self.coefficient_values(points), coeffs)

    def is_zero(self) -> bool:
        return all(sp.simplify(c) == 0 for c in self.coefficients)

    def __neg__(self):
        return FormField(self.n, self.degree, [-c for c in self.coefficients], self.domain, self.variables)

    def __mul__(self, s):
        return FormField(self.n, self.degree, [c * s for c in self.coefficients], self.domain, self.variables)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, FormField) and (other.n, other.degree) == (self.n, self.degree):
            return FormField(self.n, self.degree,
                             [a + b for a, b in zip(self.coefficients, other.coefficients)],
                             self.domain, self.variables)
        return SumForm(self, other)

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        terms = []
        for s, c in zip(basis_subsets(self.n, self.degree), self.coefficients):
            if c != 0:
                d = "^".join("d" + self.variables[i] for i in s)
                terms.append(f"({c}) {d}".strip())
        return f"FormField({' + '.join(terms) or '0'}, degree={self.degree})"


def _parse_key(key) -> tuple[int, ...]:
    if isinstance(key, str):
        return tuple(int(s) for s in key.split(",") if s.strip())
    if isinstance(key, int):
        return (key,)
    return tuple(key)


def _perm_sign(order) -> int:
    inv = sum(1 for a, b in itertools.combinations(order, 2) if a > b)
    return -1 if inv % 2 else 1


def _split_terms(text: str):
    """Split at top-level + and - signs, yielding (sign, term)."""
    terms = []
    depth = 0
    sign = 1
    current = ""
    prev = ""
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-−" and depth == 0:
            stripped = current.strip()
            sci = len(stripped) >= 2 and stripped[-1] in "eE" and stripped[-2].isdigit()
            if stripped and prev not in "*/^(" and not sci:
                terms.append((sign, stripped))
                current = ""
                sign = -1 if ch in "-−" else 1
                prev = ch
                continue
            if not stripped:
                sign *= -1 if ch in "-−" else 1
                prev = ch
                continue
        current += ch
        if not ch.isspace():
            prev = ch
    if current.strip():
        terms.append((sign, current.strip()))
    return terms


class ScaledForm(Form):
    def __init__(self, form: Form, scale: float):
        self.form = form
        self.scale = scale
        self.n = form.n
        self.degree = form.degree

    def evaluate_many(self, points, coeffs):
        return self.scale * self.form.evaluate_many(points, coeffs)


class SumForm(Form):
    def __init__(self, a: Form, b: Form):
        if (a.n, a.degree) != (b.n, b.degree):
            raise GradeError("cannot add forms of different degree or dimension")
        self.a, self.b = a, b
        self.n, self.degree = a.n, a.degree

    def evaluate_many(self, points, coeffs):
        return self.a.evaluate_many(points, coeffs) + self.b.evaluate_many(points, coeffs)


def d(form: FormField) -> FormField:
    """Exterior derivative, computed symbolically.

    For a top-degree form the result is the zero form of the same degree,
    flagged ``degenerate``.
    """
    n, k = form.n, form.degree
    if k >= n:
        out = FormField.zero(n, k, form.domain, form.variables)
        out.degenerate = True
        return out
    xs = form.symbols
    index = subset_index(n, k)
    coeffs = []
    for s in basis_subsets(n, k + 1):
        total = sp.Integer(0)
        for m, j in enumerate(s):
            rest = s[:m] + s[m + 1:]
            total += (-1) ** m * sp.diff(form.coefficients[index[rest]], xs[j])
        coeffs.append(sp.expand(total))
    return FormField(n, k + 1, coeffs, form.domain, form.variables)


def interior(beta: MultiVector, form: FormField) -> FormField:
    """Interior product with (i_beta w)(p; a) = w(p; beta ^ a)."""
    if beta.n != form.n:
        raise DimensionError("multivector and form live in different dimensions")
    if beta.k > form.degree:
        raise GradeError(f"cannot contract a degree-{form.degree} form with a grade-{beta.k} multivector")
    if not is_simple(beta):
        raise SimplicityError("interior product is defined for simple multivectors")
    n, k, s = form.n, form.degree, beta.k
    coeffs = []
    for i in range(dim(n, k - s)):
        e = np.zeros(dim(n, k - s))
        e[i] = 1.0
        wedge = wedge_coeffs(beta.coeffs, e, n, s, k - s)
        total = sp.Integer(0)
        for j, w in enumerate(wedge):
            if w != 0.0:
                total += _num(w) * form.coefficients[j]
        coeffs.append(sp.expand(total))
    return FormField(n, k - s, coeffs, form.domain, form.variables)


class PullbackForm(Form):
    """(F^* w)(p; a) = w(F(p); F_{p*} a), evaluated numerically."""

    def __init__(self, mapping, form: Form):
        if mapping.n_out != form.n:
            raise DimensionError(f"map lands in R^{mapping.n_out}, form lives on R^{form.n}")
        self.mapping = mapping
        self.form = form
        self.n = mapping.n_in
        self.degree = form.degree

    def evaluate_many(self, points, coeffs):
        points, coeffs = self._check_args(points, coeffs)
        image = self.mapping.evaluate(points)
        pushed = np.einsum("mij,mj->mi", compound_matrix(self.mapping.jacobian(points), self.degree), coeffs)
        return self.form.evaluate_many(image, pushed)


def pullback(mapping, form: Form) -> PullbackForm:
    return PullbackForm(mapping, form)


def fd_exterior_derivative(form: Form, points, coeffs, step: float = 1e-4) -> np.ndarray:
    """Central-difference exterior derivative of an evaluable form.

    dw(p; e_J) = sum_m (-1)^m d/dx_{j_m} w(p; e_{J without j_m}).
    """
    n, k = form.n, form.degree
    points = np.atleast_2d(np.asarray(points, dtype=float))
    coeffs = np.asarray(coeffs, dtype=float).reshape(points.shape[0], dim(n, k + 1))
    index = subset_index(n, k)
    out = np.zeros(points.shape[0])
    for col, s in enumerate(basis_subsets(n, k + 1)):
        c = coeffs[:, col]
        if not np.any(c):
            continue
        for m, j in enumerate(s):
            rest = index[s[:m] + s[m + 1:]]
            e = np.zeros((points.shape[0], dim(n, k)))
            e[:, rest] = 1.0
            shift = np.zeros(n)
            shift[j] = step
            deriv = (form.evaluate_many(points + shift, e) - form.evaluate_many(points - shift, e)) / (2 * step)
            out += (-1) ** m * c * deriv
    return out


@dataclass(frozen=True)
class OrderBound:
    """Bracket for sup of the s-th derivative norm over the domain.

    ``kind`` is "sup" for orders below r and "lipschitz" for order r, where
    the bound is the Lipschitz constant of the (r-1)-st derivatives.
    """

    order: int
    kind: str
    upper: float
    lower: float


@dataclass(frozen=True)
class FormNormData:
    r: int
    value: float
    orders: tuple[OrderBound, ...]

    @property
    def lower(self) -> float:
        return max((o.lower for o in self.orders), default=0.0)

    @property
    def exact(self) -> bool:
        return self.value - self.lower <= 1e-9 * max(1.0, self.value)


def exact_br_norm(form: FormField, r: int, domain: Domain | None = None,
                  rel_tol: float = 1e-9, max_cells: int = 400) -> FormNormData:
    """B^r norm of a form over a box or ball.

    The norm is the largest of sup ||D^s w|| for s < r and the Lipschitz
    constant of D^{r-1} w, which on a convex domain equals sup ||D^r w||.
    Each bound pairs an interval-arithmetic upper bound (Frobenius norm of
    the derivative tensor over coefficients) with a sampled lower bound; the
    reported ``value`` is the certified upper bound.
    """
    domain = domain or form.domain
    if domain is None:
        raise DomainError("a bounded domain is needed to compute a B^r norm")
    key = (r, domain, rel_tol, max_cells)
    if key in form._norm_cache:
        return form._norm_cache[key]
    box = domain.bounding_box()
    contains = None if isinstance(domain, Box) else domain.contains
    xs = form.symbols
    n = form.n
    orders = []
    for s in range(r + 1):
        exprs, weights = [], []
        for combo in itertools.combinations_with_replacement(range(n), s):
            counts = np.bincount(np.array(combo, dtype=int), minlength=n) if combo else np.zeros(n, int)
            mult = math.factorial(s) // math.prod(math.factorial(int(c)) for c in counts)
            for c in form.coefficients:
                e = sp.diff(c, *[xs[i] for i in combo]) if combo else c
                exprs.append(e)
                weights.append(mult)
        upper, lower = maximize_over_box(exprs, weights, form.variables, box.lo, box.hi, contains,
                                         rel_tol=rel_tol, max_cells=max_cells)
        kind = "lipschitz" if (s == r and r > 0) else "sup"
        orders.append(OrderBound(s, kind, upper, lower))
    data = FormNormData(r, max(o.upper for o in orders), tuple(orders))
    form._norm_cache[key] = data
    return data


def function_br_norm(expr, variables: Sequence[str], r: int, domain: Domain | None) -> FormNormData:
    return exact_br_norm(FormField(len(variables), 0, [expr], domain, variables), r)


def _num(v: float):
    return sp.Integer(int(v)) if float(v).is_integer() else sp.Float(v)
