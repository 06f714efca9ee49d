"""Exception hierarchy.

Everything raised on purpose derives from ``ChlabError``. Errors that signal a
broken numerical invariant (as opposed to bad files or missing inputs) derive
from ``InvariantViolation`` so the CLI can map them to exit code 2.
"""


class ChlabError(Exception):
    pass


class InvariantViolation(ChlabError):
    pass


# potential_model
class MomentumNotPositive(InvariantViolation):
    pass


class InsufficientDecay(InvariantViolation):
    pass


class GridError(InvariantViolation):
    pass


# forward_scattering
class IntegratorDiverged(InvariantViolation):
    pass


class NearZeroK(InvariantViolation):
    pass


class DegenerateColumn(InvariantViolation):
    pass


# phase_geometry
class PoleOfPhase(InvariantViolation):
    pass


class NoAdmissibleAngle(InvariantViolation):
    pass


class SignViolation(InvariantViolation):
    def __init__(self, msg, k=None):
        super().__init__(msg)
        self.k = k


class PreconditionError(InvariantViolation):
    pass


# soliton_rh
class ContourCollision(InvariantViolation):
    pass


class PoleQuery(InvariantViolation):
    pass


class SingularSystem(InvariantViolation):
    pass


class SymmetryViolation(InvariantViolation):
    pass


class ZeroDenominator(InvariantViolation):
    pass


class NonMonotoneX(InvariantViolation):
    pass


# pde_reference
class BlowUp(InvariantViolation):
    pass


# harness
class MissingData(ChlabError):
    pass


class BoundaryRay(InvariantViolation):
    pass
