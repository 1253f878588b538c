"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by the toolkit."""


class ConfigError(GeometryError, ValueError):
    """Malformed curve definition or command-line override."""


class NonRegularPoint(GeometryError):
    pass


class FlatPoint(GeometryError):
    pass


class DegenerateCenter(GeometryError):
    """Every normal of the curve passes through the query point."""


class OnCaustic(GeometryError):
    """The query point lies on the caustic (a normal foot is a multiple root)."""


class OnCurve(GeometryError):
    """The query point lies on the polyline used for a winding computation."""


class ConstantWidthSuspected(GeometryError):
    """Too many double normals were found; the curve looks non-generic."""


class CoincidentPoints(GeometryError):
    pass


class ParallelNormals(GeometryError):
    pass


class NotOrthotripod(GeometryError):
    pass


class RankDeficient(GeometryError):
    def __init__(self, msg, double_normal=None):
        super().__init__(msg)
        self.double_normal = double_normal


class NotInCore(GeometryError):
    pass


class NotFourCusp(GeometryError):
    pass


class NumberingBreakdown(GeometryError):
    def __init__(self, msg, location=None):
        if location is not None:
            location = tuple(float(x) for x in location)
            msg = f"{msg} at ({', '.join(f'{x:.6g}' for x in location)})"
        super().__init__(msg)
        self.location = location
