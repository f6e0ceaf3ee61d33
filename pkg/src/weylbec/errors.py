"""Exception hierarchy.

Errors are grouped so the CLI can map them onto exit codes: assumption
violations, numerical failures and configuration problems.
"""


class WeylBecError(Exception):
    """Base class for all package errors."""


class ConfigError(WeylBecError):
    """Bad user input: model text, flags or config files."""


class ExprSyntaxError(ConfigError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name, position):
        super().__init__(f"unknown identifier {name!r}", position)
        self.name = name


class AssumptionViolated(WeylBecError):
    """A model fails one of the structural clauses (a)-(d)."""

    def __init__(self, clause, witness, message=""):
        text = f"clause ({clause}) violated near {witness}"
        if message:
            text += f": {message}"
        super().__init__(text)
        self.clause = clause
        self.witness = witness


class NoAdmissibleBasePoint(AssumptionViolated):
    def __init__(self, witness=None, message="no admissible base point found"):
        super().__init__("d", witness, message)


class DanglingEndpoint(AssumptionViolated):
    """An open contour end is not close to any projected Weyl point."""

    def __init__(self, witness):
        super().__init__("c", witness, "open Fermi-arc end far from every projected Weyl point")


class NumericalError(WeylBecError):
    """A numerical stage failed; usually a grid or chain is too coarse."""


class NewtonDiverged(NumericalError):
    def __init__(self, cell):
        super().__init__(f"Newton refinement diverged from cell {cell}")
        self.cell = cell


class GapClosed(NumericalError):
    def __init__(self, point, gap):
        super().__init__(f"spectral gap {gap:.3g} closes near {point}")
        self.point = point
        self.gap = gap


class NonIntegerResidual(NumericalError):
    def __init__(self, value):
        super().__init__(f"lattice Chern sum {value!r} is not close to an integer")
        self.value = value


class ConvergenceFailure(NumericalError):
    pass


class GapViolation(NumericalError):
    def __init__(self, s, gap):
        super().__init__(f"loop comes within {gap:.3g} of a gap closing (s={s:.6f})")
        self.s = s
        self.gap = gap


class LocalizationAmbiguous(NumericalError):
    def __init__(self, s, energy, weight):
        super().__init__(
            f"midgap state at s={s:.6f}, E={energy:.3g} has left weight {weight:.3f}"
        )
        self.s = s
        self.energy = energy
        self.weight = weight


class TrackingLost(NumericalError):
    def __init__(self, s, overlap):
        super().__init__(f"edge-state tracking lost at s={s:.6f} (overlap {overlap:.3f})")
        self.s = s
        self.overlap = overlap


class NonTransversalCrossing(NumericalError):
    def __init__(self, s, derivative):
        super().__init__(f"non-transversal zero crossing at s={s:.6f} (slope {derivative:.3g})")
        self.s = s
        self.derivative = derivative


class TangentialCrossing(NumericalError):
    def __init__(self, point):
        super().__init__(f"tangential curve crossing near {point}")
        self.point = point


class SignInconsistent(NumericalError):
    def __init__(self, values):
        super().__init__("orientation sign changes along a Fermi-arc component")
        self.values = values


class ZeroA(WeylBecError, ValueError):
    def __init__(self):
        super().__init__("transfer matrix needs a != 0")
