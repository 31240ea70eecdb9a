"""Exception hierarchy shared across the package."""


class TierPolicyError(Exception):
    """Base class for every error raised by tierpolicy."""


class ConfigError(TierPolicyError, ValueError):
    pass


class ConfigSyntaxError(ConfigError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownKeyError(ConfigError):
    pass


class MissingFieldError(ConfigError):
    pass


class DuplicateNameError(ConfigError):
    pass


class ConfigValidationError(ConfigError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class DirectiveError(TierPolicyError, ValueError):
    """Malformed directive document or directive inconsistent with a config."""


class ResponseParseError(TierPolicyError, ValueError):
    pass


class UnknownNameError(ResponseParseError):
    pass


class TransportError(TierPolicyError):
    pass


class CassetteMissError(TransportError):
    def __init__(self, digest: str):
        super().__init__(f"no cassette entry for prompt digest {digest}")
        self.digest = digest


class DigestMismatchError(TierPolicyError, ValueError):
    pass


class AllocationInfeasibleError(TierPolicyError):
    pass


class UnknownDeviceError(TierPolicyError, ValueError):
    pass


class WorkloadError(TierPolicyError, ValueError):
    pass


class SimulationInvariantError(TierPolicyError, AssertionError):
    pass


class OracleTooLargeError(TierPolicyError):
    pass


class ScenarioError(TierPolicyError):
    pass
