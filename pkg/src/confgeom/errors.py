"""Exception hierarchy shared by every module."""


class GeometryError(ValueError):
    """Base class for numerical-geometry failures."""

    reason = "geometry-error"


class DomainError(GeometryError):
    reason = "point-outside-domain"


class DegeneratePatchError(GeometryError):
    reason = "degenerate-patch"


class DegenerateMetricError(GeometryError):
    reason = "degenerate-metric"


class VanishingCurvatureError(GeometryError):
    reason = "vanishing-curvature"


class NotOsculatingError(GeometryError):
    reason = "not-osculating"


class StationaryPointError(GeometryError):
    reason = "stationary-point"


class NonConformalError(GeometryError):
    reason = "non-conformal-at-point"


class WrongMapClassError(GeometryError):
    reason = "wrong-map-class"


class NonUnitSpeedError(GeometryError):
    reason = "nonunit-initial-speed"


class ScenarioError(ValueError):
    """Invalid scenario configuration.

    ``kind`` is one of ``parse-error``, ``unknown-key``, ``unknown-surface-id``,
    ``unknown-curve-id``, ``unknown-correspondence-id``, ``unknown-check``,
    ``domain-mismatch`` or ``invalid-value``.
    """

    def __init__(self, kind, message, line=None, column=None):
        self.kind = kind
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{kind}: {message}{where}")
