"""
Systematic Generator Matrix Module

Holds the parity part P(D) of a systematic generator G(D) = [I | P(D)],
realizes each parity column in observer canonical form, and validates the
matrix:
1. Every column's common denominator must have a nonzero constant term
2. The memory of the minimal realization is the dimension of the states
   reachable from zero in the (observable) stacked observer-form realization
3. A declared constraint length is accepted when it is at least that minimum
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .polynomials import (
    BinaryPoly,
    GeneratorParseError,
    RationalFn,
    parse_rational,
    poly_divmod,
    poly_lcm,
)

logger = logging.getLogger(__name__)


class RealizabilityError(ValueError):
    """Raised when a parity column cannot be built as a feedback shift register."""


class ConstraintLengthError(ValueError):
    """Raised when the declared constraint length is below the minimal realization."""


@dataclass(frozen=True)
class GeneratorMatrix:
    """
    Systematic (N+M', N, nu) convolutional code over GF(2).

    The identity part is implicit; `parity[i][j]` is the entry of P(D) that
    maps source i onto parity stream j.

    Attributes:
        parity: N x M' grid of reduced rational functions
        declared_nu: Constraint length claimed by the code's author, if any
        label: Optional display name (e.g. 'G1')
    """
    parity: Tuple[Tuple[RationalFn, ...], ...]
    declared_nu: Optional[int] = None
    label: str = ""

    def __post_init__(self):
        if len(self.parity) == 0:
            raise ValueError("Generator matrix needs at least one source row")
        widths = {len(row) for row in self.parity}
        if len(widths) != 1 or 0 in widths:
            raise ValueError(f"Parity rows must share a nonzero width, got widths {sorted(widths)}")

    @property
    def N(self) -> int:
        return len(self.parity)

    @property
    def M_prime(self) -> int:
        return len(self.parity[0])

    def column(self, j: int) -> Tuple[RationalFn, ...]:
        return tuple(row[j] for row in self.parity)

    def to_text(self) -> List[str]:
        """Rows in the config-file notation, entries separated by ';'."""
        return [" ; ".join(str(entry) for entry in row) for row in self.parity]


def parse_generator(rows: Sequence[str], declared_nu: Optional[int] = None,
                    label: str = "") -> GeneratorMatrix:
    """
    Parse parity rows such as `1+D+D^2+D^3 / 1+D+D^3`.

    Args:
        rows: One string per source; entries for the M' parity columns are
              separated by ';'
        declared_nu: Optional declared constraint length
        label: Optional display name

    Raises:
        GeneratorParseError: With the character position inside the offending row
    """
    parity = []
    for row_index, row in enumerate(rows):
        entries = []
        offset = 0
        for chunk in row.split(";"):
            if chunk.strip() == "":
                raise GeneratorParseError(f"Empty entry in row {row_index + 1}", offset)
            entries.append(parse_rational(chunk, offset))
            offset += len(chunk) + 1
        parity.append(tuple(entries))
    return GeneratorMatrix(parity=tuple(parity), declared_nu=declared_nu, label=label)


@dataclass(frozen=True)
class ColumnRealization:
    """
    Observer canonical form of one parity column.

    Attributes:
        denominator: LCM of the column's reduced denominators, q(D)
        numerators: Per-source numerators scaled to the common denominator
        memory: max(deg q, max deg numerator)
    """
    denominator: BinaryPoly
    numerators: Tuple[BinaryPoly, ...]
    memory: int


def realize_column(entries: Sequence[RationalFn]) -> ColumnRealization:
    """Put one parity column over its common denominator."""
    common = BinaryPoly(1)
    for entry in entries:
        common = poly_lcm(common, entry.denominator)
    if common.coefficient(0) == 0:
        raise RealizabilityError(
            f"Common denominator {common} has no constant term; feedback would need a future input"
        )
    numerators = []
    for entry in entries:
        scale, _ = poly_divmod(common, entry.denominator)
        numerators.append(entry.numerator * scale)
    memory = max([common.degree()] + [num.degree() for num in numerators] + [0])
    return ColumnRealization(denominator=common, numerators=tuple(numerators), memory=memory)


class ObserverRealization:
    """
    Stacked observer-canonical-form shift registers for all parity columns.

    The register state is an integer bitmask: column j owns bits
    [offset_j, offset_j + memory_j), bit offset_j + k - 1 holding register s_k.
    Input blocks are integers whose bit i is the input bit of source i.
    """

    def __init__(self, generator: GeneratorMatrix):
        self.generator = generator
        self.N = generator.N
        self.M_prime = generator.M_prime
        self.columns = [realize_column(generator.column(j)) for j in range(self.M_prime)]

        self.offsets = []
        offset = 0
        for col in self.columns:
            self.offsets.append(offset)
            offset += col.memory
        self.register_count = offset

        # input masks per (column, power): which sources feed tap D^k
        self._tap_masks = []
        for col in self.columns:
            masks = []
            for k in range(col.memory + 1):
                mask = 0
                for i, num in enumerate(col.numerators):
                    if num.coefficient(k):
                        mask |= 1 << i
                masks.append(mask)
            self._tap_masks.append(masks)

    def step(self, state: int, inputs: int) -> Tuple[int, int]:
        """
        Advance the registers by one trellis step.

        Args:
            state: Register bitmask
            inputs: Input block bitmask (bit i = source i)

        Returns:
            Tuple of (next_state, parity_bits) where bit j of parity_bits is
            the output of parity column j
        """
        next_state = 0
        parity_bits = 0
        for j, col in enumerate(self.columns):
            base = self.offsets[j]
            masks = self._tap_masks[j]
            L = col.memory
            regs = [(state >> (base + k)) & 1 for k in range(L)]
            v = bin(inputs & masks[0]).count("1") & 1
            if L > 0:
                v ^= regs[0]
            parity_bits |= v << j
            for k in range(1, L + 1):
                bit = bin(inputs & masks[k]).count("1") & 1
                bit ^= col.denominator.coefficient(k) & v
                if k < L:
                    bit ^= regs[k]
                next_state |= bit << (base + k - 1)
        return next_state, parity_bits

    def reachable_dimension(self) -> int:
        """
        Dimension of the subspace reachable from the zero state.

        Builds the Krylov span {A^k B e_i} by GF(2) elimination on bitmasks.
        """
        basis = {}

        def insert(vec: int) -> bool:
            while vec:
                pivot = vec.bit_length() - 1
                if pivot not in basis:
                    basis[pivot] = vec
                    return True
                vec ^= basis[pivot]
            return False

        frontier = [self.step(0, 1 << i)[0] for i in range(self.N)]
        while frontier:
            new_frontier = []
            for vec in frontier:
                if insert(vec):
                    new_frontier.append(self.step(vec, 0)[0])
            frontier = new_frontier
        return len(basis)


@dataclass
class ValidationReport:
    """Outcome of validate_generator."""
    N: int
    M_prime: int
    column_memories: List[int]
    observer_memory: int
    minimal_nu: int
    declared_nu: Optional[int]
    warnings: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.declared_nu is None or self.declared_nu >= self.minimal_nu


def validate_generator(g: GeneratorMatrix) -> ValidationReport:
    """
    Validate a systematic generator matrix and compute its minimal memory count.

    Raises:
        RealizabilityError: If a column's common denominator has no constant term
        ConstraintLengthError: If the declared nu is below the minimal realization
    """
    realization = ObserverRealization(g)
    memories = [col.memory for col in realization.columns]
    minimal = realization.reachable_dimension()

    report = ValidationReport(
        N=g.N,
        M_prime=g.M_prime,
        column_memories=memories,
        observer_memory=realization.register_count,
        minimal_nu=minimal,
        declared_nu=g.declared_nu,
    )

    for j, col in enumerate(realization.columns):
        if all(num.is_zero() for num in col.numerators):
            report.warnings.append(f"Parity column {j + 1} is identically zero")
    if minimal < realization.register_count:
        report.warnings.append(
            f"Observer form uses {realization.register_count} registers; "
            f"{minimal} suffice after sharing"
        )
    if g.declared_nu is not None and g.declared_nu > minimal:
        report.warnings.append(f"Declared nu={g.declared_nu} exceeds minimal nu={minimal}")

    if not report.valid:
        raise ConstraintLengthError(
            f"Declared nu={g.declared_nu} is below the minimal realization nu={minimal}"
        )

    for message in report.warnings:
        logger.info("%s: %s", g.label or "generator", message)
    return report
