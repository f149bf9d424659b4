"""Deterministic families of test forms used to probe chains through pairings."""
from __future__ import annotations

import itertools

import numpy as np

from .domains import Domain
from .exterior import basis_subsets
from .expressions import default_variables
from .forms import FormField


def _coefficient_pool(variables) -> list[str]:
    pool = ["1"]
    pool += list(variables)
    pool += [f"{a}*{b}" for a, b in itertools.combinations_with_replacement(variables, 2)]
    pool += [f"sin({v})" for v in variables] + [f"cos({v})" for v in variables]
    pool += [f"exp({v})" for v in variables]
    return pool


def polynomial_battery(n: int, degree: int, max_degree: int = 2, domain: Domain | None = None,
                       variables=None) -> list[FormField]:
    """Monomials of total degree <= max_degree times each basis covector.

    These span the polynomial forms of that degree, which makes them the
    default probe for cycle detection.
    """
    variables = tuple(variables or default_variables(n))
    monomials = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            monomials.append("*".join(combo) if combo else "1")
    out = []
    for mono in monomials:
        for s in basis_subsets(n, degree):
            out.append(FormField(n, degree, {tuple(i + 1 for i in s): mono}, domain, variables))
    return out


def standard_battery(n: int, degree: int, count: int = 10, domain: Domain | None = None,
                     variables=None) -> list[FormField]:
    """First ``count`` forms of a fixed list mixing polynomials and smooth functions."""
    variables = tuple(variables or default_variables(n))
    subsets = basis_subsets(n, degree)
    out = []
    for coef in _coefficient_pool(variables):
        for s in subsets:
            out.append(FormField(n, degree, {tuple(i + 1 for i in s): coef}, domain, variables))
            if len(out) == count:
                return out
    # pool exhausted: mix subsets with shifted sines
    j = 0
    while len(out) < count:
        s = subsets[j % len(subsets)]
        v = variables[j % n]
        out.append(FormField(n, degree, {tuple(i + 1 for i in s): f"sin({v} + {j + 1})"}, domain, variables))
        j += 1
    return out


def random_polynomial_form(n: int, degree: int, rng: np.random.Generator, max_degree: int = 2,
                           domain: Domain | None = None, variables=None) -> FormField:
    """Form whose coefficients are random polynomials with small integer-valued weights."""
    variables = tuple(variables or default_variables(n))
    monomials = ["1"]
    for d in range(1, max_degree + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            monomials.append("*".join(combo))
    coeffs = []
    for _ in basis_subsets(n, degree):
        weights = rng.integers(-3, 4, size=len(monomials))
        terms = [f"({w})*{m}" for w, m in zip(weights, monomials) if w]
        coeffs.append(" + ".join(terms) if terms else "0")
    return FormField(n, degree, coeffs, domain, variables)


def random_battery(n: int, degree: int, count: int, seed: int = 0, **kw) -> list[FormField]:
    rng = np.random.default_rng(seed)
    return [random_polynomial_form(n, degree, rng, **kw) for _ in range(count)]
