"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* ``PreconditionViolation`` -- the input is well formed but a mathematical
  hypothesis fails (J^2 != -1, a non-sublattice, an even-index isogeny...).
* ``Inconclusive`` -- a heuristic search gave up; this says nothing about
  the mathematics.
"""


class BrauerKitError(Exception):
    pass


class PreconditionViolation(BrauerKitError, ValueError):
    pass


class Inconclusive(BrauerKitError):
    pass


class NotASublattice(PreconditionViolation):
    pass


class DegeneratePairing(PreconditionViolation):
    pass


class NotSymmetric(PreconditionViolation):
    pass


class NotEquivariant(PreconditionViolation):
    pass


class NotAnInvolution(PreconditionViolation):
    pass


class NotAComplexStructure(PreconditionViolation):
    pass


class NotTauStable(PreconditionViolation):
    pass


class NotSaturated(PreconditionViolation):
    pass


class NoNondegenerateForm(PreconditionViolation):
    pass


class InstanceTooLarge(PreconditionViolation):
    pass


class TableViolation(PreconditionViolation):
    pass


class EvenIndex(PreconditionViolation):
    pass


class NotAConjugationStableSubring(PreconditionViolation):
    pass


class InvalidDiscriminants(PreconditionViolation):
    pass


class NotAnIdeal(PreconditionViolation):
    pass


class InvalidAlgebra(PreconditionViolation):
    pass


class SearchFailed(Inconclusive):
    pass
