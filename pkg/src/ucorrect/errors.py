"""Exception hierarchy shared by all ucorrect modules."""


class UcorrectError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(UcorrectError):
    """An operation received no usable input (empty text, corpus, or file)."""


class MalformedLine(UcorrectError):
    """A data file line does not match the expected format.

    Carries the 1-based line number for diagnostics.
    """

    def __init__(self, line_no: int, message: str = ""):
        self.line_no = line_no
        detail = f": {message}" if message else ""
        super().__init__(f"malformed line {line_no}{detail}")


class InvalidConfig(UcorrectError):
    """A configuration value is outside its documented range."""


class InvalidInput(UcorrectError):
    """An argument value is outside its documented domain."""


class MaskIsSentinel(UcorrectError):
    """A scorer was asked for the probability of the mask or unk sentinel."""


class LengthMismatch(UcorrectError):
    """Two sequences that must have equal length do not."""


class ProtocolError(UcorrectError):
    """The external scorer sent a malformed or out-of-contract message."""


class Timeout(UcorrectError):
    """The external scorer did not answer within the configured deadline."""


class ProcessExited(UcorrectError):
    """The external scorer process terminated unexpectedly."""
