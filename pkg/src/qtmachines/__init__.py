"""Quantum thermal machines: Otto cycles, semiclassical corrections, reciprocating
and continuous engines, quantum friction and correlated heat exchange."""
from .errors import (AmbiguityError, ConvergenceError, DegeneracyError, DivergenceError, InvalidInputError,
                     QTMError, TruncationError, UnsupportedError)

__version__ = "0.1.0"
