"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific failures."""


class AlignmentError(ToolkitError):
    """Grid does not admit the requested unit-cube (or cube-size) partition."""


class ParameterError(ToolkitError):
    """A numeric parameter violates a documented hypothesis."""


class ResolutionError(ToolkitError):
    """Grid too coarse for the requested decomposition."""


class RangeError(ToolkitError):
    """Lattice point or dyadic shell outside the representable range."""


class ShapeError(ToolkitError):
    """Mismatched grids, block counts, or array shapes."""


class ConstructionError(ToolkitError):
    """A tuned numerical construction failed to reach its target."""


class CostCapError(ToolkitError):
    """Requested computation exceeds the configured cost cap."""

    def __init__(self, estimate, cap):
        super().__init__(
            f"estimated {estimate:.3g} inner evaluations exceeds cap {cap:.3g}"
        )
        self.estimate = estimate
        self.cap = cap


class SchemaError(ToolkitError):
    """Config document violates the schema; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
