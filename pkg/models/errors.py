from typing import Any, Dict, Optional


class LtlPipelineError(Exception):
    """Base class for every error raised by the translation pipeline.

    Carries a short message plus a ``details`` dict so that callers (the CLI,
    the evaluation harness) can report the same structured error payload the
    services log.
    """

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class FormulaSyntaxError(LtlPipelineError):
    """Token-level syntax problem. ``position`` is 1-based."""

    def __init__(self, message: str, position: int, token: Optional[str] = None):
        super().__init__(f"{message} at token {position}", {"position": position, "token": token})
        self.position = position
        self.token = token


class UnknownToken(FormulaSyntaxError):
    pass


class MalformedExpression(FormulaSyntaxError):
    pass


class UnknownAtom(LtlPipelineError):
    pass


class MissingPhrase(LtlPipelineError):
    pass


class UnparsableCanonical(LtlPipelineError):
    pass


class AmbiguousPhrase(LtlPipelineError):
    pass


class LexiconError(LtlPipelineError):
    pass


class NoMatchingStructure(LtlPipelineError):
    pass


class MultipleMatchingStructures(LtlPipelineError):
    pass


class InsufficientAPs(LtlPipelineError):
    pass


class ServiceUnavailable(LtlPipelineError):
    retriable = True


class MalformedServiceResponse(LtlPipelineError):
    retriable = True


class EmptyOutputSet(LtlPipelineError):
    pass


class EmptyCorpus(LtlPipelineError):
    pass


class ParseFailure(LtlPipelineError):
    def __init__(self, message: str, line: int, details: Optional[Dict[str, Any]] = None):
        merged = {"line": line}
        merged.update(details or {})
        super().__init__(f"line {line}: {message}", merged)
        self.line = line


class StatMismatch(LtlPipelineError):
    pass


class TooFewExamples(LtlPipelineError):
    pass


class ConfigError(LtlPipelineError):
    pass


class UnknownSubcommand(LtlPipelineError):
    pass
