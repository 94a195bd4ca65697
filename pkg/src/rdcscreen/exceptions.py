"""Exception types shared across the package."""


class RdcScreenError(Exception):
    """Base class for all errors raised by rdcscreen."""


class PdbParseError(RdcScreenError):
    """Malformed PDB record; carries the offending line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyStructureError(RdcScreenError):
    pass


class MissingHydrogenError(RdcScreenError):
    """Amide/alpha hydrogen cannot be constructed for this residue."""


class DimensionMismatchError(RdcScreenError):
    pass


class UnknownVectorTypeError(RdcScreenError):
    def __init__(self, vtype):
        super().__init__(f"unknown vector type: {vtype!r}")
        self.vtype = vtype


class UnderdeterminedError(RdcScreenError):
    """Fewer observations than free tensor parameters."""


class TraceError(RdcScreenError):
    """Principal order parameters do not sum to zero."""


class EmptyDataError(RdcScreenError):
    pass


class ModeError(RdcScreenError):
    """Operation invoked in a scoring mode it does not support."""


class ConfigError(RdcScreenError):
    pass


class DegenerateFitError(RdcScreenError):
    """Regression input has no spread along the predictor axis."""
