from __future__ import annotations


class AppError(Exception):
    """Base error for expected failures."""

    code: str = ""

    def __init__(self, message: str, *, http_status: int = 400):
        super().__init__(message)
        self.message = message
        self.http_status = http_status

    @property
    def error_code(self) -> str:
        return self.code or type(self).__name__


class UsageError(AppError):
    pass


class ParseError(AppError):
    pass


class DuplicateComponentName(AppError):
    def __init__(self, name: str):
        super().__init__(f"duplicate component name: {name}")
        self.name = name


class EmptyBundle(AppError):
    def __init__(self, message: str = "bundle has no components"):
        super().__init__(message)


class UnknownSigner(AppError):
    def __init__(self, message: str = "signer not present in trust store"):
        super().__init__(message, http_status=422)


class InvalidSignature(AppError):
    code = "InvalidSignature"

    def __init__(self, message: str = "invalid signature"):
        super().__init__(message, http_status=422)


class DigestMismatch(InvalidSignature):
    def __init__(self, message: str = "digest does not match content"):
        super().__init__(message)


class BadSignature(InvalidSignature):
    def __init__(self, message: str = "signature verification failed"):
        super().__init__(message)


class StorageFailure(AppError):
    def __init__(self, message: str = "storage failure"):
        super().__init__(message, http_status=503)


class CorruptStore(AppError):
    pass


class BindFailure(AppError):
    pass


class BadDigest(AppError):
    def __init__(self, message: str = "expected 64 lowercase hex characters"):
        super().__init__(message, http_status=422)


class CertServerUnavailable(AppError):
    def __init__(self, message: str = "certificate server unavailable"):
        super().__init__(message, http_status=503)


class RemoteError(AppError):
    """Error answer relayed from the certificate server."""

    def __init__(self, code: str, message: str, *, http_status: int = 400):
        super().__init__(message, http_status=http_status)
        self.code = code
