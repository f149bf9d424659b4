"""Maps F: U_1 in R^n -> R^m with exact Jacobians."""
from __future__ import annotations

from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .domains import Domain, contains_all
from .errors import DimensionError, DomainError, ImageEscapeError
from .expressions import check_supported, default_variables, lambdify_many, symbols, to_expr


class MapField:
    """A map given by one expression per output coordinate.

    Args:
        components: expressions (sympy, infix strings or prefix lists).
        variables: input variable names; defaults to x, y, z / x1..xn.
        domain: optional domain U_1 checked on evaluation.
        codomain: optional U_2; images outside it raise ImageEscapeError.
    """

    def __init__(self, components, variables: Sequence[str] | None = None,
                 domain: Domain | None = None, codomain: Domain | None = None):
        if variables is None:
            raise DimensionError("variables must be given for a MapField")
        self.variables = tuple(variables)
        self.components = tuple(to_expr(c, self.variables) for c in components)
        for c in self.components:
            check_supported(c)
        self.domain = domain
        self.codomain = codomain

    @classmethod
    def identity(cls, n: int, variables=None, domain=None) -> MapField:
        variables = tuple(variables or default_variables(n))
        return cls(list(symbols(variables)), variables, domain, domain)

    @classmethod
    def linear(cls, matrix, offset=None, variables=None, domain=None, codomain=None) -> MapField:
        mat = np.asarray(matrix, dtype=float)
        m, n = mat.shape
        variables = tuple(variables or default_variables(n))
        xs = symbols(variables)
        off = np.zeros(m) if offset is None else np.asarray(offset, dtype=float)
        comps = []
        for i in range(m):
            comps.append(sum((_num(mat[i, j]) * xs[j] for j in range(n)), _num(off[i])))
        return cls(comps, variables, domain, codomain)

    @property
    def n_in(self) -> int:
        return len(self.variables)

    @property
    def n_out(self) -> int:
        return len(self.components)

    @cached_property
    def jacobian_exprs(self) -> tuple[tuple[sp.Expr, ...], ...]:
        xs = symbols(self.variables)
        return tuple(tuple(sp.diff(c, x) for x in xs) for c in self.components)

    @cached_property
    def _eval(self):
        return lambdify_many(self.components, self.variables)

    @cached_property
    def _jac(self):
        flat = [e for row in self.jacobian_exprs for e in row]
        return lambdify_many(flat, self.variables)

    def _check_domain(self, points):
        if not contains_all(self.domain, points):
            raise DomainError("point outside the map's domain")

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self._check_domain(points)
        out = self._eval(points)
        if self.codomain is not None and not contains_all(self.codomain, out):
            bad = out[~self.codomain.contains(out)]
            raise ImageEscapeError(f"image leaves the codomain, e.g. at {bad[0].tolist()}")
        return out

    def jacobian(self, points) -> np.ndarray:
        """Jacobians at each point, shape (m, n_out, n_in)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self._check_domain(points)
        return self._jac(points).reshape(points.shape[0], self.n_out, self.n_in)

    def __call__(self, points):
        return self.evaluate(points)

    def substitute(self, values: dict[str, float], variables: Sequence[str] | None = None) -> MapField:
        """Fix some input variables, e.g. ``{"t": 0}`` to slice a homotopy."""
        xs = dict(zip(self.variables, symbols(self.variables)))
        subs = {xs[k]: to_expr(v, ()) for k, v in values.items()}
        remaining = tuple(variables or [v for v in self.variables if v not in values])
        comps = [sp.expand(c.subs(subs)) for c in self.components]
        return MapField(comps, remaining, None, self.codomain)

    def compose(self, inner: MapField) -> MapField:
        """self o inner."""
        if inner.n_out != self.n_in:
            raise DimensionError(f"cannot compose R^{inner.n_out} output with R^{self.n_in} input")
        xs = symbols(self.variables)
        subs = dict(zip(xs, inner.components))
        comps = [c.subs(subs, simultaneous=True) for c in self.components]
        return MapField(comps, inner.variables, inner.domain, self.codomain)

    def is_identity(self) -> bool:
        xs = symbols(self.variables)
        return self.n_in == self.n_out and all(sp.simplify(c - x) == 0 for c, x in zip(self.components, xs))

    def is_constant(self) -> bool:
        return all(sp.simplify(e) == 0 for row in self.jacobian_exprs for e in row)

    def seminorm(self, r: int, domain: Domain | None = None) -> float:
        """|F|_{D^r} = max_{i,j} of the B^{r-1} norm of dF_i/dx_j over the domain."""
        from .forms import function_br_norm

        if r < 1:
            raise ValueError("the D^r seminorm needs r >= 1")
        domain = domain or self.domain
        best = 0.0
        for row in self.jacobian_exprs:
            for e in row:
                best = max(best, function_br_norm(e, self.variables, r - 1, domain).value)
        return best

    def to_json(self) -> dict:
        from .expressions import to_prefix

        out = {"variables": list(self.variables), "components": [to_prefix(c) for c in self.components]}
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        if self.codomain is not None:
            out["codomain"] = self.codomain.to_json()
        return out

    def __repr__(self):
        return f"MapField({list(self.variables)} -> {[str(c) for c in self.components]})"


class NumericMap:
    """Map given by a vectorized callable; Jacobian by central differences.

    ``func`` takes an (m, n_in) array and returns (m, n_out).
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], n_in: int, n_out: int,
                 step: float = 1e-5, domain: Domain | None = None, codomain: Domain | None = None):
        self.func = func
        self.n_in = n_in
        self.n_out = n_out
        self.step = step
        self.domain = domain
        self.codomain = codomain

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not contains_all(self.domain, points):
            raise DomainError("point outside the map's domain")
        out = np.asarray(self.func(points), dtype=float).reshape(points.shape[0], self.n_out)
        if self.codomain is not None and not contains_all(self.codomain, out):
            raise ImageEscapeError("image leaves the codomain")
        return out

    __call__ = evaluate

    def jacobian(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        jac = np.empty((points.shape[0], self.n_out, self.n_in))
        for j in range(self.n_in):
            dp = np.zeros(self.n_in)
            dp[j] = self.step
            plus = np.asarray(self.func(points + dp)).reshape(-1, self.n_out)
            minus = np.asarray(self.func(points - dp)).reshape(-1, self.n_out)
            jac[:, :, j] = (plus - minus) / (2 * self.step)
        return jac


def _num(v: float):
    return sp.Integer(int(v)) if float(v).is_integer() else sp.Float(v)
