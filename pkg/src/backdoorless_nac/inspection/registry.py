from __future__ import annotations

from backdoorless_nac.inspection.detector import Detector
from backdoorless_nac.inspection.detectors import (
    AuthBypassReachDetector,
    CredentialScanDetector,
    ProfileDeviationDetector,
    StaticCompareScoreDetector,
    VulnLookupDetector,
)
from backdoorless_nac.inspection.errors import UnknownAlgorithm


class DetectorRegistry:
    """Algorithm id -> detector; fixed after construction."""

    def __init__(self, detectors: list[Detector] | None = None):
        detectors = detectors or [
            AuthBypassReachDetector(),
            StaticCompareScoreDetector(),
            CredentialScanDetector(),
            ProfileDeviationDetector(),
            VulnLookupDetector(),
        ]
        self._detectors = {d.algorithm: d for d in detectors}

    def get(self, algorithm: str) -> Detector:
        if algorithm not in self._detectors:
            raise UnknownAlgorithm(algorithm)
        return self._detectors[algorithm]

    @property
    def algorithms(self) -> list[str]:
        return sorted(self._detectors)
