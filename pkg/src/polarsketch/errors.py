"""Exception types shared across the package."""


class PolarError(Exception):
    """Base class for library-specific failures."""


class IndeterminateSpectrumError(PolarError):
    """A Fourier-quotient or log-spectrum criterion hit a vanishing coefficient.

    Quotient-based domination tests and the infinite-divisibility test are
    undefined when the relevant spectrum has a (numerically) zero entry, e.g.
    for the uniform distribution.  The condition is reported explicitly
    instead of being folded into a silent ``False``.
    """


class UnsupportedAlphabetError(PolarError):
    """Operation is only defined for a restricted set of alphabet sizes."""


class ResourceLimitError(PolarError):
    """Exact enumeration would exceed the configured oracle cap."""


class InfeasibleError(PolarError):
    """A feasibility search found no admissible point."""


class FormatError(PolarError):
    """Malformed serialized container.

    ``offset`` is the byte position at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset
