"""Exception hierarchy shared by all pipeline stages."""


class TrajriskError(Exception):
    """Base class for all errors raised by this package."""


class ScenarioError(TrajriskError):
    """Scenario input is malformed or violates a precondition."""


class DegenerateDividerError(ScenarioError):
    """Lane-divider point triplet cannot define a unique quadratic."""


class RoadError(TrajriskError):
    """Fitted dividers cannot be assembled into a consistent road."""


class EngineError(TrajriskError):
    """Pipeline failure with the originating stage attached."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
