"""Exception hierarchy shared by all hbc_chansim modules."""


class HBCError(Exception):
    """Base class for every error raised by this package."""


class InvalidNetlist(HBCError, ValueError):
    pass


class SingularSystem(HBCError, ArithmeticError):
    pass


class InvalidParams(HBCError, ValueError):
    pass


class NonPositiveInput(InvalidParams):
    pass


class CodeOutOfRange(HBCError, ValueError):
    pass


class InvalidConfig(HBCError, ValueError):
    pass


class SafetyViolation(HBCError):
    """Transmit power above the policy cap.

    Carries both the offending level and the cap so callers can report them.
    """

    def __init__(self, tx_power_dbm, max_tx_dbm):
        self.tx_power_dbm = tx_power_dbm
        self.max_tx_dbm = max_tx_dbm
        super().__init__(
            f"transmit power {tx_power_dbm} dBm exceeds the {max_tx_dbm} dBm cap"
        )


class SimulationError(HBCError):
    """A solver failure annotated with the scenario and frequency that caused it."""

    def __init__(self, scenario_id, freq_hz, cause):
        self.scenario_id = scenario_id
        self.freq_hz = freq_hz
        self.cause = cause
        super().__init__(f"{scenario_id} @ {freq_hz} Hz: {cause}")


class FormatError(HBCError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GridMismatch(HBCError, ValueError):
    pass


class MissingDistance(HBCError, ValueError):
    pass


class ZeroVariance(HBCError, ValueError):
    pass


class EmptyInput(HBCError, ValueError):
    pass


class AllEvaluationsFailed(HBCError):
    pass
