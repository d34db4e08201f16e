"""Exception hierarchy shared across the package."""


class BackchaseError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BackchaseError):
    """Malformed input: bad schema, bad script parameters, bad file contents."""


class SchemaMismatch(ValidationError):
    """Two instances (or an instance and a mapping) disagree on schema."""


class ChaseError(BackchaseError):
    """A dependency could not be applied: unknown function, non-ground
    function argument, or a body relation missing from the instance."""


class ProvenanceError(BackchaseError):
    """An operation needs richer provenance than the store carries."""
