"""Exception taxonomy shared across the package.

The CLI maps these onto stable exit codes: configuration problems exit
with 2, numerical failures with 3 (comparison mismatches exit 1 but are
not exceptions).
"""


class HyperlatticeError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(HyperlatticeError):
    """Invalid run configuration, sampler bounds, or lattice reference."""


class NumericalError(HyperlatticeError):
    """A solve failed or produced an unacceptable residual."""
