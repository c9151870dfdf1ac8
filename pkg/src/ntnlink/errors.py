"""Exception taxonomy shared across the package.

ConfigurationError  -> bad static setup (layer specs, code files, config files); CLI exit 2
UsageError          -> a caller violated an API contract (shape/length mismatch)
NumericalError      -> non-finite values where finite ones are required; CLI exit 3
CheckpointMismatch  -> checkpoint does not match the built architecture; CLI exit 4
"""


class NtnLinkError(Exception):
    pass


class ConfigurationError(NtnLinkError):
    pass


class UsageError(NtnLinkError):
    pass


class NumericalError(NtnLinkError):
    pass


class CheckpointMismatch(NtnLinkError):
    pass
