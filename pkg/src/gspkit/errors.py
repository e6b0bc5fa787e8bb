"""Exception hierarchy shared across the package.

Every error raised on purpose derives from :class:`GspError`, so callers can
catch one base class at CLI or pipeline boundaries.
"""


class GspError(Exception):
    """Base class for all gspkit errors."""


# --- similarity / series errors ------------------------------------------

class LengthMismatchError(GspError, ValueError):
    """Two series that must have equal length do not."""


class ZeroVarianceError(GspError, ValueError):
    """A series is constant where nonzero variance is required."""


class EmptySeriesError(GspError, ValueError):
    """A series is empty where at least one sample is required."""


# --- spectral errors ------------------------------------------------------

class NotSymmetricError(GspError, ValueError):
    """Matrix expected to be symmetric is not (beyond tolerance)."""


class DimensionMismatchError(GspError, ValueError):
    """Signal / basis / graph dimensions do not agree."""


class NonFiniteGainError(GspError, ValueError):
    """A filter response evaluates to a non-finite gain."""


# --- reconstruction errors ------------------------------------------------

class EmptyMaskError(GspError, ValueError):
    """Reconstruction requires at least one sampled node."""


class SingularSystemError(GspError, ValueError):
    """The interpolation system is singular (a connected component has no
    sampled node)."""


class ShapeMismatchError(GspError, ValueError):
    """Array shapes do not agree."""


class EmptyWindowsError(GspError, ValueError):
    """An event-window list is empty where at least one window is required."""


# --- sampling errors ------------------------------------------------------

class BudgetTooLargeError(GspError, ValueError):
    """Sampling budget must be strictly smaller than the number of nodes."""


# --- forecasting errors ---------------------------------------------------

class SeriesTooShortError(GspError, ValueError):
    """Time axis too short to cut a single input/target window."""


class EmptyTrainSetError(GspError, ValueError):
    """Training requires a non-empty train split."""


class DivergedLossError(GspError, RuntimeError):
    """Training loss became non-finite."""


# --- data / config errors -------------------------------------------------

class BinTooSmallError(GspError, ValueError):
    """Downsampling bin does not span an integer number >= 1 of samples."""


class ReferenceMissingError(GspError, KeyError):
    """The alignment reference sensor id is not present."""


class NoEventsError(GspError, ValueError):
    """Event detection found no window above threshold."""


class ConfigInvalidError(GspError, ValueError):
    """A configuration value is out of range or inconsistent."""


class RangeOutOfBoundsError(GspError, ValueError):
    """A requested timestep range falls outside the signal."""
