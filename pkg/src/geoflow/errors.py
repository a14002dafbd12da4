"""Exception types raised by the level-set machinery."""


class GeoflowError(Exception):
    pass


class DegenerateInterface(GeoflowError):
    """The smoothed interface measure vanishes (no interface in the domain)."""


class DegenerateGradient(GeoflowError):
    """A cut cell carries a (numerically) flat level-set function."""


class NoInterface(GeoflowError):
    """The level-set function never changes sign."""


class SolverDiverged(GeoflowError):
    """The iterative linear solver hit its iteration cap."""


class DegenerateCurvature(GeoflowError):
    """Curvature is constant along the interface, so area cannot be set independently."""


class SingularSystem(GeoflowError):
    """The combined volume/area correction system is singular."""


class ConfigError(GeoflowError):
    pass
