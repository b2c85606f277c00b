from __future__ import annotations

from functools import cached_property

from pydantic import BaseModel, ConfigDict, model_validator

from backdoorless_nac.core.canonical import digest_of, sha256_hex
from backdoorless_nac.domain.entities.inspection import ControlFlowGraph
from backdoorless_nac.domain.value_objects.hex_types import Digest
from backdoorless_nac.errors import DuplicateComponentName


class Component(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    content: bytes
    cfg_sidecar: ControlFlowGraph | None = None
    supplier: str | None = None
    # declared capability tags, merged with marker-detected ones by profile deviation
    capabilities: frozenset[str] = frozenset()

    @cached_property
    def content_digest(self) -> str:
        return sha256_hex(self.content)

    @cached_property
    def inspection_digest(self) -> str:
        """Everything the detectors read from this component, not only its bytes."""
        return digest_of(
            {
                "content": self.content_digest,
                "cfg": self.cfg_sidecar,
                "capabilities": self.capabilities,
            }
        )


class FirmwareBundle(BaseModel):
    """Unit of hashing, inspection and measurement. `components` is in boot order."""

    model_config = ConfigDict(frozen=True)

    name: str
    version: str
    device_class: str
    components: tuple[Component, ...] = ()

    @model_validator(mode="after")
    def _unique_names(self) -> "FirmwareBundle":
        seen: set[str] = set()
        for c in self.components:
            if c.name in seen:
                raise DuplicateComponentName(c.name)
            seen.add(c.name)
        return self

    @property
    def component_names(self) -> list[str]:
        return [c.name for c in self.components]

    def component(self, name: str) -> Component | None:
        for c in self.components:
            if c.name == name:
                return c
        return None


class SoftwareDigest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    component_digests: tuple[tuple[str, Digest], ...]
    aggregate: Digest

    def as_map(self) -> dict[str, str]:
        return dict(self.component_digests)
