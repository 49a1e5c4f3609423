"""Exception hierarchy.

Every error carries the name of the module contract it violates so the CLI
can report it; precondition failures map to exit code 2.
"""


class FraclapError(Exception):
    """Base class for toolkit errors."""

    contract = "fraclap"

    def __init__(self, message, *, contract=None):
        super().__init__(message)
        if contract is not None:
            self.contract = contract


class StructuralError(FraclapError, ValueError):
    """Malformed grid or field data (shape/size mismatch, bad file)."""

    contract = "grid-core"


class DomainError(FraclapError, ValueError):
    """A parameter lies outside the range where an operation is defined."""


class PoleError(DomainError):
    """A Gamma factor sits on a pole and no finite value exists."""

    contract = "gamma-calculus"


class ZeroModeError(FraclapError, ValueError):
    """The zero Fourier mode cannot be inverted for the requested operation."""

    contract = "spectral-op"


class SolverAccuracyError(FraclapError, RuntimeError):
    """A numerical solve or fit missed its accuracy target."""


class OracleError(FraclapError, RuntimeError):
    """An independent oracle failed to converge."""

    contract = "model-solutions"


class FitError(FraclapError, RuntimeError):
    """A power-law fit window is empty, too small, or unstable."""

    contract = "model-solutions"
