"""Exception hierarchy shared by every codec module.

The CLI maps the three families below onto exit codes: argument problems
exit 2, malformed or damaged input exits 3, bad configuration exits 4.
"""


class LwvcError(Exception):
    exit_code = 1


class ArgumentError(LwvcError, ValueError):
    exit_code = 2


class FormatError(LwvcError):
    exit_code = 3


class UnsupportedFormatError(FormatError):
    pass


class TruncationError(FormatError):
    pass


class CorruptionError(FormatError):
    pass


class ConsistencyError(FormatError):
    pass


class ConfigError(LwvcError):
    exit_code = 4


class LevelOverflowError(ConfigError, ValueError):
    pass


class PlanError(ConfigError, ValueError):
    pass


class DomainError(ArgumentError):
    pass
