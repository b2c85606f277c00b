from __future__ import annotations

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

from backdoorless_nac.errors import UsageError


class Settings(BaseSettings):
    """
    Central configuration.

    - Values loaded from the environment and `.env`
    - Each daemon has its own settings class with an env prefix,
      CLI flags are passed as init kwargs and win over the environment
    """

    # ----------------------------
    # Service
    # ----------------------------
    SERVICE_NAME: str = "backdoorless-nac"
    ENVIRONMENT: str = "development"
    # one-shot CLI commands; daemons use their own log_level
    LOG_LEVEL: str = "WARNING"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class CertServerSettings(BaseSettings):
    listen: str = "127.0.0.1:8700"
    store_path: Path = Path("certificates.jsonl")
    trust_store_path: Path = Path("trust_store.json")
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="CERTD_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class VerifierSettings(BaseSettings):
    listen: str = "127.0.0.1:8701"
    cert_server_url: str = "http://127.0.0.1:8700"
    policy_path: Path = Path("policy.json")
    trust_store_path: Path = Path("trust_store.json")
    device_registry_path: Path = Path("device_registry.json")
    audit_log_path: Path = Path("audit.jsonl")

    # ----------------------------
    # Sessions
    # ----------------------------
    nonce_ttl_seconds: int = 300  # 5 minutes
    session_timeout_seconds: float = 10.0
    cert_server_timeout_seconds: float = 5.0

    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="VERIFIERD_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class ProverSettings(BaseSettings):
    connect_timeout_seconds: float = 10.0
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="PROVER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


def parse_listen(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not host or not port.isdigit() or int(port) > 65535:
        raise UsageError(f"expected host:port, got {value!r}")
    return host.strip("[]"), int(port)


_settings: Settings | None = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings
