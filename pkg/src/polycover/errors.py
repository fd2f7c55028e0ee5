"""Exception hierarchy shared by every stage of the pipeline."""


class PolycoverError(Exception):
    """Base class for all library errors."""


class InvalidArgument(PolycoverError, ValueError):
    """A parameter is outside its admissible range."""


class DegenerateInput(PolycoverError, ValueError):
    """Geometric input is degenerate (collinear, duplicated, exterior)."""


class InfeasibleFit(PolycoverError):
    """The lattice scaling factor is non-positive: the polygon is too small."""


class NumericalBlowup(PolycoverError):
    """Integration produced velocities too large for the chosen time step."""


class CoincidentCenters(PolycoverError):
    """Two centers coincide so the force direction is undefined."""


class NonConvergence(PolycoverError):
    """An iterative stage hit its iteration cap.

    ``result`` carries the best state reached so callers can still report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
