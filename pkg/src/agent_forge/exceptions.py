"""Exception hierarchy shared by every stage of the pipeline."""


class AgentForgeError(Exception):
    """Base class for all errors raised by agent_forge."""


class ValidationError(AgentForgeError, ValueError):
    """A parameter or config value is outside its allowed domain.

    ``field`` carries the dotted config path when the error comes from a
    config file, so operators can find the offending entry.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ProviderError(AgentForgeError):
    """A model provider could not produce a usable response."""


class TransportError(ProviderError):
    """Network or HTTP failure talking to a remote backend."""

    def __init__(self, message, status_code=None, retriable=True):
        super().__init__(message)
        self.status_code = status_code
        self.retriable = retriable


class DecodeError(ProviderError):
    """Backend answered, but the payload could not be decoded."""

    def __init__(self, message, raw=None):
        super().__init__(message)
        self.raw = raw


class AnnotationParseError(DecodeError):
    """No JSON list could be recovered from an annotator response."""


class InvariantViolation(AgentForgeError):
    """An internal invariant was broken (e.g. mixed embedding dimensions)."""


class InvalidActionError(AgentForgeError):
    """An action referenced an element that cannot receive it."""

    def __init__(self, message, element_id=None):
        super().__init__(message)
        self.element_id = element_id


class PlanningError(AgentForgeError):
    """No action sequence reaches the requested goal."""


class PrerequisiteError(AgentForgeError):
    """A pipeline stage was invoked before the stage it depends on."""
