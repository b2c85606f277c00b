from __future__ import annotations

from abc import ABC
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Any

from backdoorless_nac.configs.logging_config import get_logger
from backdoorless_nac.domain.entities.firmware import Component, FirmwareBundle
from backdoorless_nac.domain.entities.inspection import (
    BACKDOOR_CUT,
    GREY_CUT,
    Finding,
    InspectionEntry,
    InspectionResources,
    ParamValue,
    verdict_for,
)
from backdoorless_nac.inspection.errors import BadParameters

log = get_logger(__name__)

COMMON_DEFAULTS: dict[str, ParamValue] = {"grey_cut": GREY_CUT, "backdoor_cut": BACKDOOR_CUT}


@dataclass(frozen=True)
class DetectorRun:
    findings: tuple[Finding, ...]
    executions: int


class Detector(ABC):
    """
    Template-method base class.
    Component-local detectors override _inspect_component(), bundle-global ones
    override _inspect_bundle() and set component_local = False.
    """

    algorithm: str = ""
    backdoor_types: frozenset[str] = frozenset()
    component_local: bool = True
    defaults: dict[str, ParamValue] = {}

    # ----------------------------
    # Public API
    # ----------------------------

    def resolve_parameters(
        self, supplied: Mapping[str, Any], resources: InspectionResources
    ) -> dict[str, ParamValue]:
        """Defaults, then caller values, then fingerprints of the resources consulted."""
        allowed = {**COMMON_DEFAULTS, **self.defaults}
        fingerprints = self._fingerprints(resources)
        params: dict[str, ParamValue] = dict(allowed)
        for key, value in supplied.items():
            if key in fingerprints:
                if value != fingerprints[key]:
                    raise BadParameters(f"{self.algorithm}: {key} does not match the resources")
                continue
            if key not in allowed:
                raise BadParameters(f"{self.algorithm}: unknown parameter {key!r}")
            params[key] = self._coerce(key, value, allowed[key])
        grey_cut, backdoor_cut = float(params["grey_cut"]), float(params["backdoor_cut"])
        if not (0.0 <= grey_cut < backdoor_cut <= 1.0):
            raise BadParameters(f"{self.algorithm}: need 0 <= grey_cut < backdoor_cut <= 1")
        self._validate(params, resources)
        params.update(fingerprints)
        return params

    def run(
        self,
        bundle: FirmwareBundle,
        resources: InspectionResources,
        params: Mapping[str, ParamValue],
        scope: Iterable[str] | None = None,
    ) -> DetectorRun:
        if not self.component_local:
            findings = self._inspect_bundle(bundle, resources, params)
            log.debug(
                "detector.run algorithm=%s scope=bundle findings=%s", self.algorithm, len(findings)
            )
            return DetectorRun(tuple(findings), 1)

        names = bundle.component_names if scope is None else list(scope)
        findings: list[Finding] = []
        for name in names:
            component = bundle.component(name)
            if component is None:
                continue
            findings.extend(self._inspect_component(component, resources, params))
        log.debug(
            "detector.run algorithm=%s components=%s findings=%s",
            self.algorithm,
            len(names),
            len(findings),
        )
        return DetectorRun(tuple(findings), len(names))

    def score(self, findings: Iterable[Finding], params: Mapping[str, ParamValue]) -> float:
        return max((f.weight for f in findings), default=0.0)

    def build_entry(
        self,
        *,
        subject_digest: str,
        params: Mapping[str, ParamValue],
        scope: Iterable[str],
        findings: Iterable[Finding],
        carried_forward: Iterable[str] = (),
    ) -> InspectionEntry:
        findings = tuple(
            sorted(findings, key=lambda f: (f.component, f.location, f.kind, f.detail))
        )
        score = min(1.0, max(0.0, self.score(findings, params)))
        return InspectionEntry(
            algorithm=self.algorithm,
            parameters=dict(params),
            backdoor_types=self.backdoor_types,
            component_scope=tuple(sorted(scope)),
            score=score,
            verdict=verdict_for(score, float(params["grey_cut"]), float(params["backdoor_cut"])),
            findings=findings,
            subject_digest=subject_digest,
            carried_forward=tuple(sorted(carried_forward)),
        )

    # ----------------------------
    # Hooks
    # ----------------------------

    def _fingerprints(self, resources: InspectionResources) -> dict[str, ParamValue]:
        return {}

    def _validate(self, params: Mapping[str, ParamValue], resources: InspectionResources) -> None:
        pass

    def _coerce(self, key: str, value: Any, default: ParamValue) -> ParamValue:
        if isinstance(default, bool):
            ok = isinstance(value, bool)
        elif isinstance(default, float):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            value = float(value) if ok else value
        elif isinstance(default, int):
            ok = isinstance(value, int) and not isinstance(value, bool)
        else:
            ok = isinstance(value, str)
        if not ok:
            raise BadParameters(
                f"{self.algorithm}: parameter {key!r} expects {type(default).__name__}"
            )
        return value

    def _inspect_component(
        self,
        component: Component,
        resources: InspectionResources,
        params: Mapping[str, ParamValue],
    ) -> list[Finding]:
        raise NotImplementedError(f"{self.algorithm} is not component-local")

    def _inspect_bundle(
        self,
        bundle: FirmwareBundle,
        resources: InspectionResources,
        params: Mapping[str, ParamValue],
    ) -> list[Finding]:
        raise NotImplementedError(f"{self.algorithm} is component-local")
