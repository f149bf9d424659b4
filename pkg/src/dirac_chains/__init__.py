"""Dirac chains in R^n: multivectors at points, their norms, operators and homotopies."""
from .chains import DiracChain, DifferenceTerm, expand, inside, mass_norm, normalize, support
from .domains import Ball, Box
from .errors import *  # noqa: F401,F403
from .exterior import MassEstimate, MultiVector, hodge_star, inner, is_simple, mass, mass_certificate, wedge
from .forms import FormField, d, exact_br_norm, interior, pullback
from .homotopy import (
    HomotopyMap,
    cone,
    form_homotopy,
    homotopy_residual,
    ivt_check,
    jordan_check,
    poincare_cone,
    poincare_form,
)
from .maps import MapField, NumericMap
from .matrices import ChainBasis, complex_diagnostics, lattice_complex, matrix_of
from .norms import (
    LatticeSpec,
    br_lower,
    br_norm_lattice,
    br_sandwich,
    br_upper,
    lattice_decomposition,
    pairing,
)
from .operators import (
    AffineCell,
    boundary_h,
    cartesian_wedge,
    cell_boundary,
    cell_chain,
    circle_chain,
    extrusion,
    interval_chain,
    multiply,
    polygon_chain,
    pushforward,
    square_boundary_chain,
)

__version__ = "0.1.0"
