"""Exception types shared across the package."""

from __future__ import annotations


class OtisoError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(OtisoError):
    """Operands have incompatible shapes."""


class ScalarKindMismatch(OtisoError):
    """Real and complex operands were mixed where a single kind is required."""


class NonFiniteEntries(OtisoError):
    """A tensor or matrix contains NaN or infinite entries."""


class NotUnitary(OtisoError):
    """A transform factor fails the unitarity tolerance."""


class NonHermitianInput(OtisoError):
    """Matrix handed to the Hermitian eigensolver is not Hermitian within tolerance."""


class ConvergenceFailure(OtisoError):
    """The underlying eigensolver did not converge."""


class ConfigInvalid(OtisoError):
    """An experiment or decision configuration violates its invariants."""


class EpsOutOfRange(OtisoError):
    """The requested tolerance is outside the range the gap certifies."""


class FormatError(OtisoError):
    """A serialized tensor, witness, or hypergraph file is malformed."""


class CannotDecide(OtisoError):
    """A spectrum fails the gap policy, so the spectral pipeline cannot proceed.

    Attributes
    ----------
    mode : int
        1-based flattening mode whose Gram spectrum failed.
    gap : float
        The offending minimum adjacent eigenvalue gap.
    """

    def __init__(self, mode: int, gap: float, message: str | None = None):
        self.mode = int(mode)
        self.gap = float(gap)
        super().__init__(message or f"mode-{mode} Gram spectrum fails the gap policy (min gap {gap:.3e})")


class Infeasible(OtisoError):
    """A sign or phase constraint system admits no solution.

    Attributes
    ----------
    certificate : list
        Constraint keys witnessing the contradiction.  For sign systems this
        is a set of constraints whose parity product is inconsistent; for
        phase systems it is the set of violated constraints at the best
        feasible point found.
    """

    def __init__(self, certificate, message: str | None = None):
        self.certificate = list(certificate)
        super().__init__(message or f"constraint system infeasible ({len(self.certificate)} constraints in certificate)")
