from backdoorless_nac.errors import AppError


class PolicyError(AppError):
    pass


class OutOfBand(PolicyError):
    def __init__(self, score: float, low: float, high: float):
        super().__init__(f"grey score {score} outside the band [{low}, {high})")
        self.score = score
