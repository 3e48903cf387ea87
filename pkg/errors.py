"""Exception hierarchy shared by the node generators, diagnostics and CLI"""


class LejaError(Exception):
    """Base class for every failure raised by this package"""


class ConfigError(LejaError):
    """Invalid run configuration (maps to exit code 2 in the CLI)"""


class DegenerateDomainError(LejaError):
    """Geometry that cannot carry a uniform measure (self-intersecting or zero-area polygon)"""


class DegenerateDrawError(LejaError):
    """A step produced no admissible candidate (every candidate hits an existing node)"""


class BoundFailureError(LejaError):
    """The approximate rejection bound failed: no acceptance within max_attempts"""


class InvalidSequenceError(LejaError):
    """Coincident nodes where pairwise distinct nodes are required"""


class ReferenceUnavailableError(LejaError):
    """No closed-form equilibrium density is known for the domain kind"""
