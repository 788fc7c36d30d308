"""Exception hierarchy shared by the package."""


class SchwarzianError(Exception):
    """Base class for all errors raised by this package."""


class SingularPointError(SchwarzianError, ZeroDivisionError):
    """Division by a jet (or value) whose constant term vanishes."""


class BranchPointError(SchwarzianError, ValueError):
    """A multivalued function was requested at a branch point."""


class DomainError(SchwarzianError, ValueError):
    """A point lies outside (or too close to the boundary of) a domain."""


class LocalUnivalenceError(SchwarzianError, ArithmeticError):
    """The Jacobian is singular or too ill-conditioned to invert."""


class ConfigError(SchwarzianError, ValueError):
    """Malformed map document or run configuration."""
