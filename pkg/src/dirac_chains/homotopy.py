"""Cone construction, chain homotopies, fillings of cycles and primitives of closed forms.

Orientation: the time factor comes first, so a homotopy is a map
F(t, p) on [0, 1] x U.  With this convention the cone K = F_*(I x .)
satisfies

    boundary(K J) + K(boundary J) = f1_* J - f0_* J,

so for a contraction (f0 = identity, f1 = constant) and a cycle J of grade
at least 1, boundary(K J) = -J.  The filling is therefore C = -K J, and the
form-side primitive is eta = -A w.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy as sp

from .batteries import polynomial_battery, standard_battery
from .chains import DiracChain, mass_norm
from .domains import Ball, Box, Domain, contains_all
from .errors import (
    DimensionError,
    DomainError,
    GradeError,
    HomotopyError,
    NotACycleError,
    NotClosedError,
)
from .exterior import compound_matrix, dim
from .expressions import default_variables, symbols, to_expr
from .forms import Form, FormField, d, fd_exterior_derivative
from .maps import MapField
from .norms import pairing
from .operators import DEFAULT_H, _product_index, boundary_h, cartesian_wedge, interval_chain, pushforward

CYCLE_REL_TOL = 1e-6


class HomotopyMap:
    """F: [0, 1] x U_1 -> U_2 given by one expression per output coordinate.

    Args:
        components: expressions in ``time`` and the space variables.
        variables: space variable names (default x, y, z / x1..xn).
        time: name of the time variable.
        domain: U_1, the set the chains live in.
        codomain: U_2, checked when pushing chains forward.
    """

    def __init__(self, components, variables: Sequence[str] | None = None, time: str = "t",
                 domain: Domain | None = None, codomain: Domain | None = None):
        if variables is None:
            variables = default_variables(len(components))
        self.variables = tuple(variables)
        if time in self.variables:
            raise ValueError(f"time variable {time!r} clashes with a space variable")
        self.time = time
        self.domain = domain
        self.codomain = codomain
        self.as_map = MapField(components, (time,) + self.variables, None, codomain)

    @classmethod
    def straight_line(cls, start, end, variables=None, domain=None, codomain=None) -> HomotopyMap:
        """F(t, p) = (1 - t) start(p) + t end(p) for expression lists ``start`` and ``end``."""
        n = len(variables) if variables else len(start)
        variables = tuple(variables or default_variables(n))
        t = sp.Symbol("t", real=True)
        a = [to_expr(e, variables) for e in start]
        b = [to_expr(e, variables) for e in end]
        comps = [sp.expand((1 - t) * u + t * v) for u, v in zip(a, b)]
        return cls(comps, variables, "t", domain, codomain)

    @classmethod
    def radial(cls, center, variables=None, domain=None, codomain=None) -> HomotopyMap:
        """Contraction F(t, p) = (1 - t) p + t c onto the point c."""
        n = len(center)
        variables = tuple(variables or default_variables(n))
        return cls.straight_line(list(symbols(variables)), [float(c) for c in center],
                                 variables, domain, codomain)

    @classmethod
    def identity(cls, n: int, variables=None, domain=None) -> HomotopyMap:
        """The t-independent homotopy F(t, p) = p."""
        variables = tuple(variables or default_variables(n))
        return cls(list(symbols(variables)), variables, "t", domain, domain)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return self.as_map.n_out

    @property
    def f0(self) -> MapField:
        return self.as_map.substitute({self.time: 0}, self.variables)

    @property
    def f1(self) -> MapField:
        return self.as_map.substitute({self.time: 1}, self.variables)

    def time_derivative(self):
        t = symbols((self.time,))[0]
        return tuple(sp.diff(c, t) for c in self.as_map.components)

    def is_contraction(self) -> bool:
        return self.f0.is_identity() and self.f1.is_constant()

    def product_domain(self) -> Box | None:
        if isinstance(self.domain, Box):
            return Box((0.0,) + self.domain.lo, (1.0,) + self.domain.hi)
        return None

    def seminorm(self, r: int) -> float:
        return self.as_map.seminorm(r, self.product_domain())

    def check_support(self, chain: DiracChain):
        if chain.n != self.n:
            raise DimensionError(f"chain in R^{chain.n}, homotopy acts on R^{self.n}")
        if not contains_all(self.domain, chain.points):
            raise DomainError("chain support leaves the homotopy's domain")

    def to_json(self) -> dict:
        out = self.as_map.to_json()
        out["time"] = self.time
        out["variables"] = list(self.variables)
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        return out

    def __repr__(self):
        return f"HomotopyMap(({self.time}, {', '.join(self.variables)}) -> {[str(c) for c in self.as_map.components]})"


def cone(chain: DiracChain, homotopy: HomotopyMap, N: int) -> DiracChain:
    """K J = F_*(I_N x J); grade goes up by one, and grade-n input gives the zero chain."""
    homotopy.check_support(chain)
    lifted = cartesian_wedge(interval_chain(N), chain)
    return pushforward(homotopy.as_map, lifted, homotopy.codomain)


@dataclass(frozen=True)
class ResidualReport:
    N: int
    h: float
    residuals: tuple[float, ...]

    @property
    def max(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    def to_json(self) -> dict:
        return {"N": self.N, "h": self.h, "residuals": list(self.residuals), "max_residual": self.max}


def homotopy_residual(chain: DiracChain, homotopy: HomotopyMap, N: int, h: float = DEFAULT_H,
                      battery: Sequence[Form] | None = None) -> ResidualReport:
    """Pairings of (dK + Kd - f1_* + f0_*) J against each battery form."""
    if chain.k == 0:
        raise HomotopyError("the chain homotopy identity needs grade >= 1; it fails for 0-chains")
    k = chain.k
    if battery is None:
        battery = standard_battery(homotopy.m, k, 10)
    kj = cone(chain, homotopy, N)
    total = (boundary_h(kj, h) + cone(boundary_h(chain, h), homotopy, N)
             - pushforward(homotopy.f1, chain) + pushforward(homotopy.f0, chain))
    return ResidualReport(N, h, tuple(pairing(total, w) for w in battery))


def cycle_residual(chain: DiracChain, battery: Sequence[FormField] | None = None) -> tuple[float, int | None]:
    """Largest |<J, d w>| over the battery, with the index of the worst form.

    For polynomial w of degree <= 2 this is the same as pairing the
    difference boundary of J with w, without any dependence on a step size.
    """
    if chain.k == 0 or chain.is_zero():
        return 0.0, None
    if battery is None:
        battery = polynomial_battery(chain.n, chain.k - 1)
    values = [abs(pairing(chain, d(w))) for w in battery]
    worst = int(np.argmax(values))
    return float(values[worst]), worst


@dataclass(frozen=True)
class PoincareChainResult:
    chain: DiracChain
    certificate: ResidualReport
    cycle_residual: float

    def to_json(self) -> dict:
        return {"terms": len(self.chain), "cycle_residual": self.cycle_residual,
                "certificate": self.certificate.to_json()}


def poincare_cone(chain: DiracChain, homotopy: HomotopyMap, N: int, h: float = DEFAULT_H,
                  battery: Sequence[Form] | None = None, cycle_battery=None,
                  cycle_tol: float | None = None, check_contraction: bool = True) -> PoincareChainResult:
    """Filling C = -K J of a cycle J, with a certificate <boundary C - J, w>."""
    n, k = chain.n, chain.k
    if not 1 <= k <= n - 1:
        raise GradeError(f"fillings are built for grades 1..{n - 1}, got {k}")
    if check_contraction and not homotopy.is_contraction():
        raise HomotopyError("expected F(0, .) = identity and F(1, .) constant")
    res, worst = cycle_residual(chain, cycle_battery)
    threshold = cycle_tol if cycle_tol is not None else CYCLE_REL_TOL * max(mass_norm(chain).upper, 1.0)
    if res > threshold:
        forms = cycle_battery or polynomial_battery(n, k - 1)
        raise NotACycleError(f"input is not a cycle: residual {res:.3e} exceeds {threshold:.3e}",
                             forms[worst], res)
    filling = -cone(chain, homotopy, N)
    if battery is None:
        battery = standard_battery(n, k, 10)
    diff = boundary_h(filling, h) - chain
    cert = ResidualReport(N, h, tuple(pairing(diff, w) for w in battery))
    return PoincareChainResult(filling, cert, res)


class HomotopyForm(Form):
    """(A w)(p; a) = int_0^1 w(F(t, p); dF/dt ^ DF_t a) dt by the midpoint rule with M nodes."""

    def __init__(self, form: Form, homotopy: HomotopyMap, M: int = 100):
        if form.degree < 1:
            raise HomotopyError("the homotopy operator needs a form of degree >= 1")
        if form.n != homotopy.m:
            raise DimensionError(f"form on R^{form.n}, homotopy lands in R^{homotopy.m}")
        if M < 1:
            raise ValueError("M must be at least 1")
        self.form = form
        self.homotopy = homotopy
        self.M = M
        self.n = homotopy.n
        self.degree = form.degree - 1

    def evaluate_many(self, points, coeffs):
        points, coeffs = self._check_args(points, coeffs)
        n, k = self.n, self.degree
        lifted = np.zeros((points.shape[0], dim(n + 1, k + 1)))
        lifted[:, _product_index(1, 1, n, k)[0]] = coeffs
        total = np.zeros(points.shape[0])
        for t in (np.arange(1, self.M + 1) - 0.5) / self.M:
            pts = np.hstack([np.full((points.shape[0], 1), t), points])
            jac = self.homotopy.as_map.jacobian(pts)
            pushed = np.einsum("mij,mj->mi", compound_matrix(jac, k + 1), lifted)
            total += self.form.evaluate_many(self.homotopy.as_map.evaluate(pts), pushed)
        return total / self.M


def form_homotopy(form: Form, homotopy: HomotopyMap, M: int = 100) -> HomotopyForm:
    return HomotopyForm(form, homotopy, M)


@dataclass(frozen=True)
class PoincareFormResult:
    primitive: Form
    residual: float
    samples: int
    step: float

    def to_json(self) -> dict:
        return {"residual": self.residual, "samples": self.samples, "step": self.step}


def sample_points(domain: Domain | None, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from a box or ball (default the cube [-1, 1]^n)."""
    if domain is None:
        domain = Box((-1.0,) * n, (1.0,) * n)
    box = domain.bounding_box()
    lo, hi = np.array(box.lo), np.array(box.hi)
    out = np.empty((0, n))
    while out.shape[0] < count:
        cand = lo + (hi - lo) * rng.random((2 * count, n))
        if isinstance(domain, Ball):
            cand = cand[domain.contains(cand)]
        out = np.vstack([out, cand])
    return out[:count]


def poincare_form(form: FormField, homotopy: HomotopyMap, M: int = 100, samples: int = 100,
                  step: float = 1e-4, seed: int = 0, check_contraction: bool = True) -> PoincareFormResult:
    """Primitive eta = -A w of a closed form, certified by a finite-difference d eta."""
    if form.degree < 1:
        raise GradeError("a primitive needs a form of degree >= 1")
    if not d(form).is_zero():
        raise NotClosedError("the form is not closed")
    if check_contraction and not homotopy.is_contraction():
        raise HomotopyError("expected F(0, .) = identity and F(1, .) constant")
    eta = -HomotopyForm(form, homotopy, M)
    rng = np.random.default_rng(seed)
    # keep finite-difference stencils inside the domain
    pts = sample_points(homotopy.domain, homotopy.n, samples, rng)
    if homotopy.domain is not None:
        c = np.array(homotopy.domain.bounding_box().lo) + np.array(homotopy.domain.bounding_box().hi)
        pts = c / 2 + (pts - c / 2) * (1 - 4 * step)
    alphas = rng.standard_normal((samples, dim(form.n, form.degree)))
    if form.is_zero():
        return PoincareFormResult(eta, 0.0, samples, step)
    fd = fd_exterior_derivative(eta, pts, alphas, step)
    exact = form.evaluate_many(pts, alphas)
    return PoincareFormResult(eta, float(np.max(np.abs(fd - exact))), samples, step)


@dataclass(frozen=True)
class BiconditionalReport:
    """Residuals for both sides of an if-and-only-if statement."""

    lhs_residual: float
    rhs_residual: float
    tol: float
    lhs_values: tuple[float, ...] = field(default=())
    rhs_values: tuple[float, ...] = field(default=())

    @property
    def lhs_holds(self) -> bool:
        return self.lhs_residual <= self.tol

    @property
    def rhs_holds(self) -> bool:
        return self.rhs_residual <= self.tol

    @property
    def consistent(self) -> bool:
        return self.lhs_holds == self.rhs_holds

    def to_json(self) -> dict:
        return {
            "lhs_residual": self.lhs_residual, "rhs_residual": self.rhs_residual, "tol": self.tol,
            "lhs_holds": self.lhs_holds, "rhs_holds": self.rhs_holds, "consistent": self.consistent,
            "lhs_values": list(self.lhs_values), "rhs_values": list(self.rhs_values),
        }


def _max_abs(chain: DiracChain, battery) -> tuple[float, tuple[float, ...]]:
    vals = tuple(abs(pairing(chain, w)) for w in battery)
    return max(vals, default=0.0), vals


def ivt_check(mapping, J: DiracChain, K: DiracChain, h: float = 1e-4, tol: float = 1e-3,
              boundary_battery=None, top_battery=None) -> BiconditionalReport:
    """Compare G_*(boundary J) = boundary K against G_* J = K through pairings.

    J lives in R^n with grade n, K in R^m with grade n.
    """
    n = J.n
    if J.k != n or K.k != n:
        raise GradeError(f"expected chains of top grade {n}, got {J.k} and {K.k}")
    if mapping.n_in != n or K.n != mapping.n_out:
        raise DimensionError("map dimensions do not match the chains")
    m = mapping.n_out
    if boundary_battery is None:
        boundary_battery = standard_battery(m, n - 1, 5)
    if top_battery is None:
        top_battery = standard_battery(m, n, 5)
    lhs = pushforward(mapping, boundary_h(J, h)) - boundary_h(K, h)
    rhs = pushforward(mapping, J) - K
    lmax, lvals = _max_abs(lhs, boundary_battery)
    rmax, rvals = _max_abs(rhs, top_battery)
    return BiconditionalReport(lmax, rmax, tol, lvals, rvals)


def jordan_check(J: DiracChain, L: DiracChain, homotopy: HomotopyMap, N: int, h: float = DEFAULT_H,
                 tol: float = 1e-2, filling_battery=None, boundary_battery=None) -> BiconditionalReport:
    """Compare L = -K J (lhs) against J = boundary L (rhs) through pairings."""
    k = J.k
    if L.k != k + 1 or L.n != J.n:
        raise GradeError(f"expected L of grade {k + 1} in R^{J.n}")
    if filling_battery is None:
        filling_battery = standard_battery(J.n, k + 1, 10)
    if boundary_battery is None:
        boundary_battery = standard_battery(J.n, k, 10)
    lmax, lvals = _max_abs(L + cone(J, homotopy, N), filling_battery)
    rmax, rvals = _max_abs(J - boundary_h(L, h), boundary_battery)
    return BiconditionalReport(lmax, rmax, tol, lvals, rvals)
