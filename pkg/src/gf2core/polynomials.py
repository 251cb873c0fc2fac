"""
GF(2) Polynomial Module

Exact arithmetic for binary polynomials and rational functions in the delay
variable D:
1. Carry-less multiplication, division and Euclidean gcd on bitsets
2. Rational functions kept in reduced form (gcd(num, den) = 1)
3. Text parsing/printing in the `1+D+D^3` notation used by config files

A polynomial is stored as a single integer whose bit k is the coefficient of
D^k, so every value fits one machine word up to degree 63.
"""

from dataclasses import dataclass
from typing import Iterable, Tuple

MAX_DEGREE = 63

_POLY_CHARS = set("0123456789D^+")


class DegreeOverflowError(ValueError):
    """Raised when a result would exceed the supported degree."""


class InvalidRationalError(ValueError):
    """Raised for a rational function with a zero denominator."""


class GeneratorParseError(ValueError):
    """Raised when generator text cannot be parsed; carries the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class BinaryPoly:
    """
    Polynomial over GF(2) in the delay variable D.

    Attributes:
        bits: Coefficient bitset; bit k is the coefficient of D^k
    """
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError(f"Coefficient bitset must be nonnegative, got {self.bits}")
        if self.bits.bit_length() > MAX_DEGREE + 1:
            raise DegreeOverflowError(
                f"Degree {self.bits.bit_length() - 1} exceeds supported maximum {MAX_DEGREE}"
            )

    @classmethod
    def from_powers(cls, powers: Iterable[int]) -> "BinaryPoly":
        """Build a polynomial from a list of exponents; repeated exponents cancel."""
        bits = 0
        for power in powers:
            if power < 0 or power > MAX_DEGREE:
                raise DegreeOverflowError(f"Exponent {power} outside 0..{MAX_DEGREE}")
            bits ^= 1 << power
        return cls(bits)

    @classmethod
    def one(cls) -> "BinaryPoly":
        return cls(1)

    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return self.bits.bit_length() - 1

    def is_zero(self) -> bool:
        return self.bits == 0

    def coefficient(self, power: int) -> int:
        return (self.bits >> power) & 1

    def powers(self) -> Tuple[int, ...]:
        return tuple(k for k in range(self.bits.bit_length()) if (self.bits >> k) & 1)

    def __add__(self, other: "BinaryPoly") -> "BinaryPoly":
        return BinaryPoly(self.bits ^ other.bits)

    __sub__ = __add__

    def __mul__(self, other: "BinaryPoly") -> "BinaryPoly":
        return poly_mul(self, other)

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for k in self.powers():
            if k == 0:
                terms.append("1")
            elif k == 1:
                terms.append("D")
            else:
                terms.append(f"D^{k}")
        return "+".join(terms)


def poly_mul(a: BinaryPoly, b: BinaryPoly) -> BinaryPoly:
    """
    Carry-less product of two polynomials over GF(2).

    Raises:
        DegreeOverflowError: If deg(a) + deg(b) exceeds MAX_DEGREE
    """
    if a.is_zero() or b.is_zero():
        return BinaryPoly(0)
    if a.degree() + b.degree() > MAX_DEGREE:
        raise DegreeOverflowError(
            f"Product degree {a.degree() + b.degree()} exceeds supported maximum {MAX_DEGREE}"
        )
    result = 0
    x, y = a.bits, b.bits
    shift = 0
    while y:
        if y & 1:
            result ^= x << shift
        y >>= 1
        shift += 1
    return BinaryPoly(result)


def poly_divmod(a: BinaryPoly, b: BinaryPoly) -> Tuple[BinaryPoly, BinaryPoly]:
    """Quotient and remainder of a / b over GF(2)."""
    if b.is_zero():
        raise ZeroDivisionError("Polynomial division by zero")
    quotient = 0
    remainder = a.bits
    db = b.degree()
    while remainder and remainder.bit_length() - 1 >= db:
        shift = remainder.bit_length() - 1 - db
        quotient ^= 1 << shift
        remainder ^= b.bits << shift
    return BinaryPoly(quotient), BinaryPoly(remainder)


def poly_gcd(a: BinaryPoly, b: BinaryPoly) -> BinaryPoly:
    """Greatest common divisor via the Euclidean algorithm."""
    while not b.is_zero():
        _, r = poly_divmod(a, b)
        a, b = b, r
    return a


def poly_lcm(a: BinaryPoly, b: BinaryPoly) -> BinaryPoly:
    if a.is_zero() or b.is_zero():
        return BinaryPoly(0)
    quotient, _ = poly_divmod(a, poly_gcd(a, b))
    return poly_mul(quotient, b)


@dataclass(frozen=True)
class RationalFn:
    """
    Rational function num(D)/den(D) over GF(2).

    Instances built through `RationalFn.of` are always reduced; the raw
    constructor keeps whatever it is given so `rational_reduce` can be
    exercised directly.
    """
    numerator: BinaryPoly
    denominator: BinaryPoly = BinaryPoly(1)

    @classmethod
    def of(cls, numerator: BinaryPoly, denominator: BinaryPoly = BinaryPoly(1)) -> "RationalFn":
        return rational_reduce(cls(numerator, denominator))

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def is_polynomial(self) -> bool:
        return self.denominator.bits == 1

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.numerator)
        return f"{self.numerator} / {self.denominator}"


def rational_reduce(r: RationalFn) -> RationalFn:
    """
    Reduce a rational function so that gcd(numerator, denominator) = 1.

    Raises:
        InvalidRationalError: If the denominator is zero
    """
    if r.denominator.is_zero():
        raise InvalidRationalError(f"Zero denominator in {r.numerator}/0")
    if r.numerator.is_zero():
        return RationalFn(BinaryPoly(0), BinaryPoly(1))
    g = poly_gcd(r.numerator, r.denominator)
    num, _ = poly_divmod(r.numerator, g)
    den, _ = poly_divmod(r.denominator, g)
    return RationalFn(num, den)


def parse_poly(text: str, offset: int = 0) -> BinaryPoly:
    """
    Parse a polynomial such as `1+D+D^3`.

    Args:
        text: Polynomial text; whitespace is ignored
        offset: Position of `text` inside a larger string, for error reporting

    Raises:
        GeneratorParseError: On unexpected characters or malformed terms
    """
    for i, ch in enumerate(text):
        if ch not in _POLY_CHARS and not ch.isspace():
            raise GeneratorParseError(f"Unexpected character {ch!r}", offset + i)

    powers = []
    position = offset
    for raw_term in text.split("+"):
        term = "".join(raw_term.split())
        if term == "":
            raise GeneratorParseError("Empty term", position)
        if term == "0":
            pass
        elif term == "1":
            powers.append(0)
        elif term == "D":
            powers.append(1)
        elif term.startswith("D^") and term[2:].isdigit():
            power = int(term[2:])
            if power > MAX_DEGREE:
                raise GeneratorParseError(f"Exponent {power} exceeds {MAX_DEGREE}", position)
            powers.append(power)
        else:
            raise GeneratorParseError(f"Malformed term {term!r}", position)
        position += len(raw_term) + 1
    return BinaryPoly.from_powers(powers)


def parse_rational(text: str, offset: int = 0) -> RationalFn:
    """Parse `num / den` (or a bare polynomial) into a reduced RationalFn."""
    for i, ch in enumerate(text):
        if ch not in _POLY_CHARS and ch != "/" and not ch.isspace():
            raise GeneratorParseError(f"Unexpected character {ch!r}", offset + i)
    parts = text.split("/")
    if len(parts) > 2:
        raise GeneratorParseError("More than one '/' in entry", offset + len(parts[0]) + len(parts[1]) + 1)
    numerator = parse_poly(parts[0], offset)
    if len(parts) == 1:
        return RationalFn.of(numerator)
    denominator = parse_poly(parts[1], offset + len(parts[0]) + 1)
    if denominator.is_zero():
        raise GeneratorParseError("Zero denominator", offset + len(parts[0]) + 1)
    return RationalFn.of(numerator, denominator)
