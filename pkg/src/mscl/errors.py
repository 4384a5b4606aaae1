"""Exception hierarchy shared by all mscl modules."""


class MsclError(Exception):
    """Base class for every error raised by this package."""


# --- frames / resampling ---

class DimensionMismatch(MsclError):
    pass


class FactorTooLarge(MsclError):
    """Downsampling would push a dimension below the 16-px floor."""


class ScaleTagViolation(MsclError):
    """A down-scaled flow field was used where a scene-scale one is required
    (or vice versa)."""


class ScaleTagMismatch(MsclError):
    """Flow field tagged with a different factor than the one supplied."""


class FrameTooSmall(MsclError):
    pass


# --- adaptive inference ---

class MissingCandidate(MsclError):
    """Candidate evaluations do not cover the configured factor set."""


class CodeOutOfRange(MsclError):
    """Side-information code does not fit in 5 bits."""


# --- codec / bitstream ---

class CorruptPayload(MsclError):
    """Entropy-coded payload cannot be decoded consistently."""


class BadFactorIndex(MsclError):
    pass


class BadMagic(MsclError):
    pass


class UnsupportedVersion(MsclError):
    pass


class TruncatedStream(MsclError):
    pass


class NonzeroReservedBits(MsclError):
    pass


class InvalidField(MsclError):
    """Structurally parseable stream field carries an out-of-contract value."""


# --- video I/O ---

class BadHeader(MsclError):
    pass


class UnsupportedColorspace(MsclError):
    pass


class TruncatedFrame(MsclError):
    pass


# --- metrics ---

class NoOverlap(MsclError):
    """Rate-distortion curves share no PSNR interval."""


class TooFewPoints(MsclError):
    pass
