"""Exception hierarchy shared across the package."""


class CrowdFlowError(Exception):
    pass


class ParseError(CrowdFlowError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class HeaderError(ParseError):
    pass


class CountMismatch(ParseError):
    pass


class OutOfBounds(CrowdFlowError, ValueError):
    pass


class OverlapError(CrowdFlowError, ValueError):
    pass


class DimensionMismatch(CrowdFlowError, ValueError):
    pass


class MalformedNetwork(CrowdFlowError, ValueError):
    pass


class NonMetricPairwise(CrowdFlowError, ValueError):
    pass


class DegenerateMean(CrowdFlowError, ArithmeticError):
    pass


class NoQualifyingSegments(CrowdFlowError):
    pass


class TooLarge(CrowdFlowError):
    pass
