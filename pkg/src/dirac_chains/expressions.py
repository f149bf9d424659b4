"""Coefficient expressions: parsing, vectorized evaluation, certified box bounds.

Expressions are sympy trees restricted to numbers, variables, +, *,
integer powers, sin, cos and exp (affine arguments included).  That keeps
derivatives exact and lets interval arithmetic bound every expression over
a box.
"""
from __future__ import annotations

import heapq
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from mpmath import iv

from .errors import UnsupportedExpressionError

_FUNCS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp}


def default_variables(n: int) -> tuple[str, ...]:
    if n <= 3:
        return ("x", "y", "z")[:n]
    return tuple(f"x{i}" for i in range(1, n + 1))


@lru_cache(maxsize=None)
def symbols(names: tuple[str, ...]) -> tuple[sp.Symbol, ...]:
    return tuple(sp.Symbol(s, real=True) for s in names)


def to_expr(value, variables: Sequence[str]) -> sp.Expr:
    """Coerce numbers, infix strings or prefix lists into a sympy expression."""
    syms = symbols(tuple(variables))
    local = dict(zip(variables, syms))
    local.update(_FUNCS)
    if isinstance(value, sp.Basic):
        return value.subs({sp.Symbol(s): v for s, v in local.items() if isinstance(v, sp.Symbol)})
    if isinstance(value, (int, float)):
        return sp.nsimplify(value) if float(value).is_integer() else sp.Float(value)
    if isinstance(value, str):
        return sp.sympify(value, locals=local)
    if isinstance(value, (list, tuple)):
        return from_prefix(value, variables)
    raise UnsupportedExpressionError(f"cannot interpret {value!r} as an expression")


def from_prefix(obj, variables: Sequence[str]) -> sp.Expr:
    """Parse prefix notation such as ``["*", "x", ["sin", ["+", "y", 1]]]``."""
    syms = dict(zip(variables, symbols(tuple(variables))))
    if isinstance(obj, (int, float)):
        return to_expr(obj, variables)
    if isinstance(obj, str):
        if obj in syms:
            return syms[obj]
        if obj == "pi":
            return sp.pi
        raise UnsupportedExpressionError(f"unknown variable {obj!r}")
    op, *args = obj
    parsed = [from_prefix(a, variables) for a in args]
    if op == "+":
        return sp.Add(*parsed)
    if op == "*":
        return sp.Mul(*parsed)
    if op == "-":
        return -parsed[0] if len(parsed) == 1 else parsed[0] - sp.Add(*parsed[1:])
    if op == "/":
        return parsed[0] / parsed[1]
    if op == "^":
        return parsed[0] ** parsed[1]
    if op in _FUNCS:
        return _FUNCS[op](parsed[0])
    raise UnsupportedExpressionError(f"unknown operator {op!r}")


def to_prefix(expr: sp.Expr):
    """Inverse of :func:`from_prefix` (numbers become floats or ints)."""
    if expr.is_Integer:
        return int(expr)
    if expr.is_Number:
        return float(expr)
    if expr is sp.pi:
        return "pi"
    if expr.is_Symbol:
        return expr.name
    if expr.is_Add:
        return ["+"] + [to_prefix(a) for a in expr.args]
    if expr.is_Mul:
        return ["*"] + [to_prefix(a) for a in expr.args]
    if expr.is_Pow:
        return ["^", to_prefix(expr.args[0]), to_prefix(expr.args[1])]
    for name, fn in _FUNCS.items():
        if isinstance(expr, fn):
            return [name, to_prefix(expr.args[0])]
    raise UnsupportedExpressionError(f"cannot encode {expr}")


def check_supported(expr: sp.Expr):
    for node in sp.preorder_traversal(expr):
        if node.is_Symbol or node.is_Number or node is sp.pi:
            continue
        if node.is_Add or node.is_Mul:
            continue
        if node.is_Pow and node.args[1].is_Integer:
            continue
        if isinstance(node, (sp.sin, sp.cos, sp.exp)):
            continue
        raise UnsupportedExpressionError(f"unsupported subexpression {node}")


def lambdify_many(exprs: Sequence[sp.Expr], variables: Sequence[str]) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluator: points (m, n) -> values (m, len(exprs))."""
    syms = symbols(tuple(variables))
    exprs = list(exprs)
    fn = sp.lambdify(syms, exprs, modules="numpy")

    def evaluate(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m = points.shape[0]
        if not exprs:
            return np.zeros((m, 0))
        cols = fn(*points.T)
        out = np.empty((m, len(exprs)))
        for i, c in enumerate(cols):
            out[:, i] = np.broadcast_to(np.asarray(c, dtype=float), (m,))
        return out

    return evaluate


def _iv_eval(expr: sp.Expr, env: dict):
    if expr.is_Symbol:
        return env[expr.name]
    if expr is sp.pi:
        return iv.pi
    if expr.is_Integer:
        return iv.mpf(int(expr))
    if expr.is_Rational:
        return iv.mpf(int(expr.p)) / iv.mpf(int(expr.q))
    if expr.is_Number:
        return iv.mpf(float(expr))
    if expr.is_Add:
        total = iv.mpf(0)
        for a in expr.args:
            total = total + _iv_eval(a, env)
        return total
    if expr.is_Mul:
        total = iv.mpf(1)
        for a in expr.args:
            total = total * _iv_eval(a, env)
        return total
    if expr.is_Pow and expr.args[1].is_Integer:
        return _iv_eval(expr.args[0], env) ** int(expr.args[1])
    if isinstance(expr, sp.sin):
        return iv.sin(_iv_eval(expr.args[0], env))
    if isinstance(expr, sp.cos):
        return iv.cos(_iv_eval(expr.args[0], env))
    if isinstance(expr, sp.exp):
        return iv.exp(_iv_eval(expr.args[0], env))
    raise UnsupportedExpressionError(f"no interval rule for {expr}")


def interval_abs_bounds(exprs: Sequence[sp.Expr], variables: Sequence[str], lo, hi) -> np.ndarray:
    """Certified upper bounds of |expr| over the box [lo, hi], one per expression."""
    env = {v: iv.mpf([float(a), float(b)]) for v, a, b in zip(variables, lo, hi)}
    out = np.empty(len(exprs))
    for i, e in enumerate(exprs):
        val = _iv_eval(e, env)
        out[i] = max(abs(float(val.a)), abs(float(val.b)))
    return out


def maximize_over_box(
    exprs: Sequence[sp.Expr],
    weights: Sequence[float],
    variables: Sequence[str],
    lo,
    hi,
    contains: Callable[[np.ndarray], np.ndarray] | None = None,
    rel_tol: float = 1e-9,
    max_cells: int = 400,
) -> tuple[float, float]:
    """Bracket sup over the box of a norm of the expression vector.

    Upper bound: sqrt(sum_i w_i * sup|e_i|^2) from interval arithmetic, refined
    by bisection.  Lower bound: max_i |e_i| at cell centres (only points for
    which ``contains`` holds are used), which is a lower bound for any
    operator norm dominated by this Frobenius-type bound.

    Returns:
        (upper, lower)
    """
    exprs = list(exprs)
    if not exprs or all(e == 0 for e in exprs):
        return 0.0, 0.0
    w = np.asarray(weights, dtype=float)
    evaluate = lambdify_many(exprs, variables)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def upper(a, b):
        bounds = interval_abs_bounds(exprs, variables, a, b)
        return float(np.sqrt(np.sum(w * bounds ** 2)))

    def lower_at(points):
        points = np.atleast_2d(points)
        if contains is not None:
            points = points[contains(points)]
        if points.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(evaluate(points))))

    corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(len(lo), -1).T
    best_lower = max(lower_at(corners), lower_at((lo + hi) / 2))
    heap = [(-upper(lo, hi), 0, lo, hi)]
    counter = 1
    while True:
        neg_ub, _, a, b = heap[0]
        ub = -neg_ub
        if ub - best_lower <= rel_tol * max(1.0, ub) or counter >= max_cells:
            return ub, min(best_lower, ub)
        heapq.heappop(heap)
        axis = int(np.argmax(b - a))
        mid = 0.5 * (a[axis] + b[axis])
        for side in (0, 1):
            a2, b2 = a.copy(), b.copy()
            if side == 0:
                b2[axis] = mid
            else:
                a2[axis] = mid
            best_lower = max(best_lower, lower_at((a2 + b2) / 2))
            heapq.heappush(heap, (-upper(a2, b2), counter, a2, b2))
            counter += 1
