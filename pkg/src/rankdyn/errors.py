"""Exception hierarchy shared across the library."""


class RankdynError(Exception):
    """Base class for all library errors."""


class FormatError(RankdynError):
    """HSMX file format violation, annotated with the offending byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass


class DimensionMismatch(RankdynError):
    pass


class InfeasibleSpec(RankdynError):
    pass


class DegenerateMatrix(RankdynError):
    pass


class TrajectoryTooShort(RankdynError):
    pass


class SeriesTooShort(RankdynError):
    pass


class TooFewRows(RankdynError):
    pass


class GroupTooSmall(RankdynError):
    pass


class ManifestError(RankdynError):
    pass
