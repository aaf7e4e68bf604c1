"""Exception hierarchy.

Two families matter to the command line interface: malformed textual input
(`InputParseError`, exit code 64) and violated structural preconditions or
invariants (`InvariantViolation`, exit code 65).
"""

from __future__ import annotations


class FreeByCyclicError(Exception):
    """Base class for all package-specific errors."""


class InputParseError(FreeByCyclicError):
    """A text input (word, map file, presentation file, CLI argument) is malformed."""


class InvariantViolation(FreeByCyclicError):
    """A structural precondition or internal invariant does not hold."""


class DisconnectedGraphError(InvariantViolation):
    """An operation that needs a connected graph received a disconnected one."""


class MarkingError(InvariantViolation):
    """A marking fails the homotopy-inverse word check."""


class NotIrreducibleError(InvariantViolation):
    """The transition matrix is not irreducible."""


class NotExpandingError(InvariantViolation):
    """The transition matrix is irreducible but not expanding."""


class MissingAssumptionError(InvariantViolation):
    """An operation was asked to use a hypothesis that was not supplied.

    Raised with an explanation of which assumption flag is required and why it
    cannot be computed internally.
    """


class FoldStuckError(InvariantViolation):
    """No fold is available but the graph map is not yet a relabeling."""


class AuxGraphCyclicError(InvariantViolation):
    """The auxiliary single-crossing digraph has a directed cycle."""


class NotACycleError(InvariantViolation):
    """A 1-chain expected to be a cycle has nonzero boundary."""


class NonIntegralClassError(InvariantViolation):
    """A cohomology class expected to be integral has non-integer coordinates."""


class ConeInfeasibleError(InvariantViolation):
    """A class lies outside the closed positive cone; carries a certificate."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class DegeneratePhaseError(InvariantViolation):
    """No generic section phase was found within the perturbation budget."""


class IterationBudgetError(InvariantViolation):
    """A flow trace exceeded its iteration budget."""


class TurnDataError(InvariantViolation):
    """A turn list violates the preconditions of the length perturbation."""


class OpenTraceError(InvariantViolation):
    """A word expected to abelianize to zero traced an open lattice path."""


class ExcludedDirectionError(InvariantViolation):
    """A direction expected inside a sector lies on an excluded ray."""
