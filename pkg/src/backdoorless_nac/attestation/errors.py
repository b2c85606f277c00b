from backdoorless_nac.errors import AppError


class AttestationError(AppError):
    pass


class NotBooted(AttestationError):
    def __init__(self, message: str = "prover has not completed measured boot"):
        super().__init__(message)


class NonceMismatch(AttestationError):
    pass


class UnknownDevice(AttestationError):
    pass


class BadSignature(AttestationError):
    def __init__(self, message: str = "quote signature verification failed"):
        super().__init__(message)


class LogPcrMismatch(AttestationError):
    def __init__(self, message: str = "replayed measurement log does not match the quoted pcr"):
        super().__init__(message)


class EmptyLog(AttestationError):
    def __init__(self, message: str = "measurement log is empty"):
        super().__init__(message)


class MalformedLog(AttestationError):
    pass


class MalformedQuote(AttestationError):
    pass


class FrameError(AttestationError):
    pass


class MalformedChallenge(AttestationError):
    pass
