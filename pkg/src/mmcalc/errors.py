"""Exception hierarchy shared by all modules."""


class MMError(Exception):
    """Base class for every error raised by mmcalc."""


class ChartError(MMError):
    """Invalid chart grid, or chart incompatible with the requested operation."""


class TopologyError(ChartError):
    """Shape topology does not match the chart (e.g. a torus on a lat-long chart)."""


class UnknownShapeError(MMError):
    pass


class StencilError(ChartError):
    """Not enough valid nodes along a grid line to build a derivative stencil."""


class DegenerateChartError(ChartError):
    """Metric determinant (or normal cross product) vanishes at an unmasked node."""


class MissingSamplesError(MMError):
    """A time derivative was requested without the temporal samples it needs."""


class StepInstabilityError(MMError):
    """Time step violates the stability bound of an integrator."""


class InstabilityError(MMError):
    """Solution grew beyond the allowed factor during time integration."""


class SingularityError(MMError):
    pass


class ClosureSingularityError(MMError):
    """The trace closure 1 + Lambda*tau of a curvature law vanishes."""


class SpeedError(MMError):
    """Tangent velocity component below the guard speed v_min."""


class QuadratureError(MMError):
    pass


class ConfigError(MMError):
    pass
