from backdoorless_nac.errors import AppError


class InspectionError(AppError):
    pass


class MalformedGraph(InspectionError):
    pass


class ProfileMismatch(InspectionError):
    pass


class UnknownAlgorithm(InspectionError):
    def __init__(self, algorithm: str):
        super().__init__(f"unknown algorithm: {algorithm}")
        self.algorithm = algorithm


class BadParameters(InspectionError):
    pass
