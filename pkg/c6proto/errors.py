"""Exception hierarchy for c6proto."""
from typing import Optional


class C6Error(Exception):
    """Base class for every error raised by the package."""


class StateError(C6Error, ValueError):
    """Malformed ket, density matrix or secret."""


class LabelError(StateError):
    """Qubit labels are duplicated, missing or not a permutation."""


class BasisError(C6Error, ValueError):
    """Measurement vectors are not orthonormal or have mixed dimensions."""


class MeasurementError(C6Error):
    """A measurement could not be carried out consistently."""


class CompletionOutcomeError(MeasurementError):
    """A completion vector was sampled although it should never occur."""


class DecompositionError(C6Error, ValueError):
    """A product-decomposition expression could not be parsed."""


class NotACodewordError(C6Error, ValueError):
    """A state matches none of the dense-coding codewords."""


class SynthesisError(C6Error):
    """No operator in the correction menu maps the residual to the target."""


class ProtocolError(C6Error):
    """A protocol run violated one of its invariants."""


class TableSyntaxError(C6Error, ValueError):
    """A table file does not follow the table grammar."""

    def __init__(self, message: str, line: int, column: int = 1, source: Optional[str] = None):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}line {line}, column {column}: {message}")


class TableWidthError(TableSyntaxError):
    """Terms of one table have inconsistent bitstring widths."""


class UnknownSymbolError(TableSyntaxError):
    """A coefficient symbol outside the table alphabet."""
