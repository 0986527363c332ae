"""Exception hierarchy and the process exit codes the CLI maps them to."""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PROTOCOL = 4
EXIT_DEPLETED = 5


class SecdtError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class UsageError(SecdtError):
    """Caller broke an API contract: bad width, party mismatch, bad parameters."""

    exit_code = EXIT_USAGE


class FormatError(SecdtError):
    """A file or wire payload could not be parsed."""

    exit_code = EXIT_IO


class ProtocolError(SecdtError):
    """The two endpoints disagree about the protocol state."""

    exit_code = EXIT_PROTOCOL


class ChannelClosedError(ProtocolError):
    """Peer endpoint closed while a message was expected."""


class DesyncError(ProtocolError):
    """Endpoints are not executing matching protocol steps."""


class VerificationError(ProtocolError):
    """Reconstructed secure result does not match the plaintext evaluation."""


class PreprocessingDepletedError(SecdtError):
    """Offline material (triples or transfer correlations) ran out."""

    exit_code = EXIT_DEPLETED
