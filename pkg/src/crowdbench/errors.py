"""Semantic exception hierarchy shared across the package."""


class CrowdBenchError(Exception):
    """Base class for all package errors."""


class DomainError(CrowdBenchError, ValueError):
    """An argument violates its contract (range, shape, or type)."""


class DataFormatError(CrowdBenchError, ValueError):
    """A data file cannot be parsed into a valid pool or matrix."""


class CoverageError(CrowdBenchError):
    """Estimates do not cover every gold-labeled sample."""


class PoolExhaustedError(CrowdBenchError):
    """No sample has unseen labels left to draw."""


class InsufficientHistoryError(CrowdBenchError):
    """A worker history is too short for an interval estimate."""


class DegeneratePosteriorError(CrowdBenchError):
    """A filtering update drove the posterior mass below floating-point floor."""
