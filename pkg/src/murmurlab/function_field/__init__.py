"""Elliptic surfaces y^2 = x^3 + x + D(t) over F_q(t): L-polynomials, types, Sha."""
from .census import (
    TABLE_TYPES, CensusResult, murmuration_density, quasi_polynomial_check,
    sha_type_invariance, type_census, write_per_curve,
)
from .cyclotomic import MENU, CyclotomicError, CyclotomicType, cyclotomic_factor, cyclotomic_poly
from .family import (
    AmbiguousTypeError, BadPlace, ConsistencyError, FFCurveRecord, UnitizedLPolynomial,
    analyse_curve, bad_fiber_analysis, c_infinity, char_sum_table, enumerate_family,
    l_polynomial, power_sum, sha_of_curve,
)
from .oracle import euler_product_oracle
