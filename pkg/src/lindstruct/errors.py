"""Exception hierarchy shared by all modules."""


class LindstructError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(LindstructError, ValueError):
    """Shapes of matrices or vectors do not fit together."""


class NotAProjectorError(LindstructError, ValueError):
    """A matrix expected to be an orthogonal projector is not one."""


class NotUnitaryError(LindstructError, ValueError):
    """A matrix expected to be unitary is not."""


class CertificationError(LindstructError):
    """A structural property that must hold for a valid generator failed numerically.

    ``defect`` carries the measured violation so callers can decide whether the
    failure is structural or a tolerance issue.
    """

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class NotInRangeError(LindstructError):
    """Right-hand side is not in the range of the unperturbed generator.

    ``overlaps`` holds the values Tr[A_i tau] against the invariant observables;
    these are exactly the solvability conditions the perturbation series uses.
    """

    def __init__(self, message, overlaps):
        super().__init__(message)
        self.overlaps = overlaps


class DegenerateBaseError(LindstructError):
    """Unique-state expansion requested for a generator with several stationary states."""


class DegenerateBeyondOrderError(LindstructError):
    """Solvability conditions do not fix the series through the requested order.

    ``directions`` lists the unresolved coefficient directions (one row per
    null vector, restricted to the orders that were requested).
    """

    def __init__(self, message, directions):
        super().__init__(message)
        self.directions = directions


class UnknownFixtureError(LindstructError, KeyError):
    pass
