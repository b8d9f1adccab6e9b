"""Exception hierarchy shared across the package.

Every error raised by vpbias derives from VpbiasError so callers (and the
CLI, which maps them to exit code 2) can catch one base class.
"""


class VpbiasError(Exception):
    """Base class for all vpbias errors."""


# --- data model / ingestion ---

class MalformedCsvError(VpbiasError):
    """CSV file has a bad header, inconsistent row arity, or unparsable key."""


class DuplicateAsnError(VpbiasError):
    """The same ASN appears more than once in a feature table."""


class TypeMismatchError(VpbiasError):
    """A cell in a numerical column does not parse as a finite real."""


class MalformedInputError(VpbiasError):
    """A vantage-point-set file could not be parsed."""


class EmptySetError(VpbiasError):
    """A vantage-point set resolved to zero members."""


class UnknownLabelError(VpbiasError):
    """A label identifier is not present in the complexity score table."""


class EmptyLabelSetError(VpbiasError):
    """Label collapse was asked to score an empty label set."""


# --- distributions ---

class NoDataError(VpbiasError):
    """Every value of a dimension is missing for the given member set."""


# --- bias metrics ---

class BinMismatchError(VpbiasError):
    """Two distributions were built over different binnings."""


class InsufficientSupportError(VpbiasError):
    """A statistical test needs a non-zero support count on both sides."""


class EmptyPopulationError(VpbiasError):
    """The population set is empty."""


class EmptySampleError(VpbiasError):
    """The sample set is empty."""


class NoAggregatableDimensionError(VpbiasError):
    """Every per-dimension score is null; no aggregate can be formed."""


# --- sampling / extension ---

class InvalidKError(VpbiasError):
    """Requested subset size is out of range for the given set."""


class InvalidNError(VpbiasError):
    """Requested number of additions is out of range."""


class EmptyCandidatesError(VpbiasError):
    """No extension candidates remain (input empty or all excluded)."""


class MissingStubDimensionError(VpbiasError):
    """Stub exclusion requested but the neighbor-count dimension is absent."""


# --- analytics ---

class EmptyEstimateSetError(VpbiasError):
    """No estimate member has a latency value."""


class AllZeroGroundTruthError(VpbiasError):
    """Every requested ground-truth percentile is zero; errors undefined."""


# --- synthetic generator ---

class InvalidSpecError(VpbiasError):
    """A synthetic-data specification is inconsistent or unsatisfiable."""
