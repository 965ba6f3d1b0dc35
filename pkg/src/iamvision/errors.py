"""Exception hierarchy shared by every layer of the toolkit."""

from __future__ import annotations


class IamVisionError(Exception):
    """Base class for all toolkit errors."""


class MalformedArn(IamVisionError, ValueError):
    pass


class PolicyError(IamVisionError, ValueError):
    """A policy document violates the statement grammar."""


class UnknownPrincipal(IamVisionError, KeyError):
    pass


class SchemaViolation(IamVisionError, ValueError):
    pass


class DanglingReference(IamVisionError, ValueError):
    pass


class DuplicateAction(IamVisionError, ValueError):
    pass


class UnknownScenario(IamVisionError, KeyError):
    pass


class EmptyExpected(IamVisionError, ValueError):
    pass


class EmptyList(IamVisionError, ValueError):
    pass


class BadFlags(IamVisionError, ValueError):
    """Command-line options that contradict each other or are incomplete."""


class Unfuzzable(IamVisionError):
    """Version probing was denied on its first request."""


class ApiError(IamVisionError):
    """An error returned by an API backend, carrying the AWS-style error code."""

    code = "ApiError"

    def __init__(self, message: str = "", *, correlation_id: str | None = None) -> None:
        super().__init__(message or self.code)
        self.message = message or self.code
        self.correlation_id = correlation_id

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.message!r})"


class AccessDenied(ApiError):
    code = "AccessDenied"


class NoSuchEntity(ApiError):
    code = "NoSuchEntity"


class Throttling(ApiError):
    code = "Throttling"

    def __init__(self, message: str = "", *, retry_after: float = 0.0, correlation_id: str | None = None) -> None:
        super().__init__(message, correlation_id=correlation_id)
        self.retry_after = retry_after


class UnsupportedOperation(ApiError):
    code = "UnsupportedOperation"


class InvalidClientTokenId(ApiError):
    code = "InvalidClientTokenId"


class ChainDepthExceeded(ApiError):
    code = "ChainDepthExceeded"


class BatchTooLarge(ApiError):
    code = "BatchTooLarge"


API_ERRORS: dict[str, type[ApiError]] = {
    cls.code: cls
    for cls in (AccessDenied, NoSuchEntity, Throttling, UnsupportedOperation,
                InvalidClientTokenId, ChainDepthExceeded, BatchTooLarge)
}
