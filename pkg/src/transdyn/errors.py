class TransdynError(Exception):
    """Base for domain errors; the CLI maps these to exit status 2."""


class LadderBaseInvalid(TransdynError):
    pass


class SeedNotOnLevelSet(TransdynError):
    pass


class CurveLost(TransdynError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class PathLeftTract(TransdynError):
    pass


class WindowTooSmall(TransdynError):
    pass


class Inconclusive(TransdynError):
    pass


class AtSingularValue(TransdynError):
    pass


class NoConvergence(TransdynError):
    pass


class WindowOverflow(TransdynError):
    def __init__(self, msg, achieved=0):
        super().__init__(msg)
        self.achieved = achieved


class NotFound(TransdynError):
    pass


class QueryInB(TransdynError):
    pass
