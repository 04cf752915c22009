"""Exact Hauptmodul expansions, Kloosterman-Bessel sums and product-formula checks for genus-zero Gamma_0(N)."""

from .arith import (
    DomainError,
    KloostermanCache,
    dedekind_psi,
    divisor_count,
    kloosterman,
    mobius,
    selberg_sides,
    sigma1,
    weil_margin,
)
from .borcherds import exponent_table, lhs_difference, product_rhs, verify_identity
from .hauptmodul import genus_zero_levels, hauptmodul, supported_levels
from .hecke import ModularFormExpansion, eta_square_form, hecke_apply
from .kernels import eisenstein_exact, eisenstein_numeric, poincare_coeff
from .qseries import BiSeries, EtaQuotient, LaurentSeries, eta_expand, j_function
from .special import SeriesEvalPolicy, bessel_i1, bessel_j1

__version__ = "0.1.0"
