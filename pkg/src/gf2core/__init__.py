"""GF(2) polynomial arithmetic and systematic generator matrices."""
from .polynomials import (
    BinaryPoly,
    RationalFn,
    MAX_DEGREE,
    DegreeOverflowError,
    InvalidRationalError,
    GeneratorParseError,
    poly_mul,
    poly_divmod,
    poly_gcd,
    poly_lcm,
    rational_reduce,
    parse_poly,
    parse_rational,
)
from .generator import (
    GeneratorMatrix,
    ObserverRealization,
    ValidationReport,
    RealizabilityError,
    ConstraintLengthError,
    parse_generator,
    validate_generator,
)

__all__ = [
    'BinaryPoly', 'RationalFn', 'MAX_DEGREE',
    'DegreeOverflowError', 'InvalidRationalError', 'GeneratorParseError',
    'poly_mul', 'poly_divmod', 'poly_gcd', 'poly_lcm', 'rational_reduce',
    'parse_poly', 'parse_rational',
    'GeneratorMatrix', 'ObserverRealization', 'ValidationReport',
    'RealizabilityError', 'ConstraintLengthError',
    'parse_generator', 'validate_generator',
]
