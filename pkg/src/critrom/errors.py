"""Exception types shared across the package.

Plain argument/domain violations raise :class:`ValueError`; the classes here
cover failures that deserve their own handling at the harness level.
"""


class CritromError(Exception):
    """Base class for package-specific failures."""


class ConfigurationError(CritromError):
    """A case definition or config file is incomplete or inconsistent."""


class NumericsError(CritromError):
    """A numerical routine failed (singular system, no convergence)."""


class TrainingError(CritromError):
    """Autoencoder training produced a non-finite loss or gradient."""
