"""Exception hierarchy shared across the package.

The tree mirrors the CLI exit-code buckets: data/integrity problems,
remote/transport failures, and numerical failures each have a common base so
callers can map whole families at once.
"""

from __future__ import annotations


class JoistError(Exception):
    """Base class for all errors raised by this package."""


class DataError(JoistError):
    """Bad input data: malformed files, broken invariants, shape mismatches."""


class FormatError(DataError):
    """A file does not match its documented format (header, field types)."""


class IntegrityError(DataError):
    """A domain-type invariant is violated (duplicate height, bad count, ...)."""


class ParseError(DataError):
    """A decoded transaction or block record is missing a mandatory field."""


class ShapeError(DataError):
    """Sequence lengths or sizes do not line up."""


class HeightRangeError(DataError):
    """A requested block height range is empty or unknown to the node."""


class SynthSpecError(DataError):
    """A synthetic-dataset specification cannot produce valid samples."""


class RemoteError(JoistError):
    """Remote node interaction failed."""


class RpcConnectionError(RemoteError):
    """Transport, HTTP, or authentication failure talking to the node."""


class NumericalError(JoistError):
    """A computation is numerically infeasible on the given data."""


class RankDeficiencyError(NumericalError):
    """The regression design matrix does not have full column rank."""


class DegenerateDataError(NumericalError):
    """Input data is degenerate for the requested statistic (e.g. zero mean)."""


class DegenerateVarianceError(DegenerateDataError):
    """A series is constant where nonzero variance is required."""


class SampleCountError(NumericalError):
    """Too few samples for the requested fit or statistic."""


class UnsupportedKindError(JoistError):
    """The operation does not apply to this model kind."""
