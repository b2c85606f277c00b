"""Command-line entry point.

Results go to stdout as JSON (or `key: value` lines with --human); logs go
to stderr. Exit codes: 0 success, 1 operational error, 2 usage error.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from backdoorless_nac import __version__
from backdoorless_nac.configs.logging_config import get_logger, setup_logging
from backdoorless_nac.configs.settings import (
    CertServerSettings,
    ProverSettings,
    VerifierSettings,
    get_settings,
    parse_listen,
)
from backdoorless_nac.core.certificates import verify_certificate
from backdoorless_nac.core.hashing import hash_bundle
from backdoorless_nac.core.loaders import (
    load_bundle,
    load_certificate,
    load_entries,
    load_inspector_key,
    load_resources,
    load_suite,
    load_trust_store,
    read_json,
    write_json,
    write_model,
)
from backdoorless_nac.core.signing import (
    generate_private_key,
    private_key_hex,
    public_key_hex,
)
from backdoorless_nac.domain.entities.certificate import IssueOptions
from backdoorless_nac.errors import AppError, UsageError
from backdoorless_nac.main import serve
from backdoorless_nac.prover.agent import TAMPER_MODES, ProverAgent, run_prover
from backdoorless_nac.prover.state import boot
from backdoorless_nac.services.inspection_service import InspectionService
from backdoorless_nac.services.scenario_service import run_scenario
from backdoorless_nac.utils.response import failure
from backdoorless_nac.verifier.daemon import serve_verifier
from backdoorless_nac.webclient.cert_server_client import CertServerClient

log = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def _emit(result: Any, human: bool) -> None:
    if not human:
        print(json.dumps(result, sort_keys=True, indent=2))
        return
    if isinstance(result, dict):
        for key in sorted(result):
            value = result[key]
            text = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
            print(f"{key}: {text}")
    else:
        print(json.dumps(result, sort_keys=True, indent=2))


def _given(**kwargs: Any) -> dict[str, Any]:
    """Only flags the user actually passed override the environment."""
    return {k: v for k, v in kwargs.items() if v is not None}


def _resources(args: argparse.Namespace):
    return load_resources(
        bundle_file=args.resources,
        patterns=args.patterns,
        profiles=args.profiles,
        advisories=args.advisories,
        markers=args.markers,
    )


def _add_resource_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--resources", type=Path, help="combined inspection resources JSON")
    p.add_argument("--patterns", type=Path, help="credential patterns (hex list)")
    p.add_argument("--profiles", type=Path, help="device class profiles")
    p.add_argument("--advisories", type=Path, help="advisory db {digest: [ids]}")
    p.add_argument("--markers", type=Path, help="capability markers {capability: hex}")


# ----------------------------
# Subcommands
# ----------------------------


def cmd_keygen(args: argparse.Namespace) -> dict[str, Any]:
    key = generate_private_key()
    public = public_key_hex(key)
    if args.kind == "inspector":
        if not args.org or not args.key_id:
            raise UsageError("keygen inspector needs --org and --key-id")
        write_json(
            args.out,
            {"org": args.org, "key_id": args.key_id, "private_key_hex": private_key_hex(key)},
        )
        if args.trust_store:
            doc = read_json(args.trust_store) if args.trust_store.exists() else {}
            keys = [k for k in doc.get(args.org, []) if k.get("key_id") != args.key_id]
            doc[args.org] = [*keys, {"key_id": args.key_id, "public_key_hex": public}]
            write_json(args.trust_store, doc)
        return {"org": args.org, "key_id": args.key_id, "public_key_hex": public}

    if not args.device_id:
        raise UsageError("keygen device needs --device-id")
    write_json(args.out, {"device_id": args.device_id, "private_key_hex": private_key_hex(key)})
    if args.registry:
        doc = read_json(args.registry) if args.registry.exists() else {}
        doc[args.device_id] = public
        write_json(args.registry, doc)
    return {"device_id": args.device_id, "public_key_hex": public}


def cmd_hash(args: argparse.Namespace) -> dict[str, Any]:
    return hash_bundle(load_bundle(args.bundle, inline=args.inline)).model_dump(mode="json")


def cmd_inspect(args: argparse.Namespace) -> dict[str, Any]:
    bundle = load_bundle(args.bundle, inline=args.inline)
    service = InspectionService(resources=_resources(args))
    entries = service.run_inspection(bundle, load_suite(args.suite))
    write_json(args.out, [e.model_dump(mode="json") for e in entries])
    return {
        "aggregate": hash_bundle(bundle).aggregate,
        "entries": [
            {"algorithm": e.algorithm, "score": e.score, "verdict": e.verdict} for e in entries
        ],
        "executions": service.executions,
        "out": str(args.out),
    }


def cmd_issue(args: argparse.Namespace) -> dict[str, Any]:
    bundle = load_bundle(args.bundle, inline=args.inline)
    key = load_inspector_key(args.key)
    options = IssueOptions(
        include_supply_chain=args.supply_chain,
        engineer=args.engineer,
        supersedes=args.supersedes,
        issued_at=args.issued_at,
    )
    cert = InspectionService().issue_certificate(
        bundle, load_entries(args.entries), key.org, key.private_key(), key.key_id, options
    )
    write_model(args.out, cert)
    return {
        "body_digest": cert.body_digest,
        "aggregate": cert.body.software_digest.aggregate,
        "inspector_org": key.org,
        "out": str(args.out),
    }


def cmd_reinspect(args: argparse.Namespace) -> dict[str, Any]:
    old = load_bundle(args.old_bundle, inline=args.inline)
    new = load_bundle(args.new_bundle, inline=args.inline)
    service = InspectionService(resources=_resources(args))
    entries = service.reinspect_updated(
        old, new, load_entries(args.entries), load_suite(args.suite)
    )
    write_json(args.out, [e.model_dump(mode="json") for e in entries])
    return {
        "aggregate": hash_bundle(new).aggregate,
        "entries": [
            {
                "algorithm": e.algorithm,
                "verdict": e.verdict,
                "carried_forward": list(e.carried_forward),
            }
            for e in entries
        ],
        "executions": service.executions,
        "out": str(args.out),
    }


def cmd_upload(args: argparse.Namespace) -> dict[str, Any]:
    cert = load_certificate(args.cert)

    async def _put() -> dict[str, Any]:
        async with CertServerClient(args.server) as client:
            return await client.put_certificate(cert)

    return asyncio.run(_put())


def cmd_verify_cert(args: argparse.Namespace) -> dict[str, Any]:
    verified = verify_certificate(load_certificate(args.cert), load_trust_store(args.trust_store))
    return {
        "ok": True,
        "body_digest": verified.body_digest,
        "inspector_org": verified.inspector_org,
        "signer_key_id": verified.signer_key_id,
        "aggregate": verified.body.software_digest.aggregate,
    }


def cmd_serve(args: argparse.Namespace) -> None:
    settings = CertServerSettings(
        **_given(listen=args.listen, store_path=args.store, trust_store_path=args.trust_store)
    )
    parse_listen(settings.listen)
    setup_logging(args.log_level or settings.log_level)
    serve(settings)


def cmd_verifierd(args: argparse.Namespace) -> None:
    settings = VerifierSettings(
        **_given(
            listen=args.listen,
            cert_server_url=args.cert_server,
            policy_path=args.policy,
            trust_store_path=args.trust_store,
            device_registry_path=args.device_registry,
            audit_log_path=args.audit_log,
        )
    )
    parse_listen(settings.listen)
    setup_logging(args.log_level or settings.log_level)
    asyncio.run(serve_verifier(settings))


def cmd_prover(args: argparse.Namespace) -> dict[str, Any]:
    settings = ProverSettings()
    host, port = parse_listen(args.connect)
    agent = ProverAgent(boot(args.bundle, args.identity, inline=args.inline), args.tamper)
    answer = asyncio.run(
        run_prover(agent, host, port, timeout=settings.connect_timeout_seconds)
    )
    return answer


def cmd_scenario(args: argparse.Namespace) -> dict[str, Any]:
    report = asyncio.run(run_scenario(args.file))
    document = report.to_document()
    if not report.passed:
        raise _ReportedFailure(document)
    return document


class _ReportedFailure(Exception):
    def __init__(self, document: dict[str, Any]):
        super().__init__("scenario expectations not met")
        self.document = document


# ----------------------------
# Parser
# ----------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="backdoorless_nac",
        description="Backdoor-inspection certificates and attestation-gated network admission.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--human", action="store_true", help="human-readable output")
    parser.add_argument("--log-level", default=None, help="stderr log level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate inspector or device keys")
    p.add_argument("kind", choices=["inspector", "device"])
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--org")
    p.add_argument("--key-id")
    p.add_argument("--trust-store", type=Path, help="add the public key to this trust store")
    p.add_argument("--device-id")
    p.add_argument("--registry", type=Path, help="enroll the public key in this registry")
    p.set_defaults(handler=cmd_keygen)

    p = sub.add_parser("hash", help="print the SoftwareDigest of a bundle")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--inline", action="store_true", help="bundle is a single JSON document")
    p.set_defaults(handler=cmd_hash)

    p = sub.add_parser("inspect", help="run a detector suite and write entries")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--inline", action="store_true")
    p.add_argument("--suite", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_resource_flags(p)
    p.set_defaults(handler=cmd_inspect)

    p = sub.add_parser("issue", help="sign a certificate over inspection entries")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--inline", action="store_true")
    p.add_argument("--entries", type=Path, required=True)
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--engineer")
    p.add_argument("--supersedes")
    p.add_argument("--supply-chain", action="store_true")
    p.add_argument("--issued-at", type=int)
    p.set_defaults(handler=cmd_issue)

    p = sub.add_parser("reinspect", help="re-inspect an updated bundle, reusing old results")
    p.add_argument("--old-bundle", type=Path, required=True)
    p.add_argument("--new-bundle", type=Path, required=True)
    p.add_argument("--inline", action="store_true")
    p.add_argument("--entries", type=Path, required=True)
    p.add_argument("--suite", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_resource_flags(p)
    p.set_defaults(handler=cmd_reinspect)

    p = sub.add_parser("upload", help="PUT a certificate to the certificate server")
    p.add_argument("--cert", type=Path, required=True)
    p.add_argument("--server", required=True)
    p.set_defaults(handler=cmd_upload)

    p = sub.add_parser("serve", help="run the certificate server")
    p.add_argument("--listen")
    p.add_argument("--store", type=Path)
    p.add_argument("--trust-store", type=Path)
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("verify-cert", help="verify a certificate offline")
    p.add_argument("--cert", type=Path, required=True)
    p.add_argument("--trust-store", type=Path, required=True)
    p.set_defaults(handler=cmd_verify_cert)

    p = sub.add_parser("verifierd", help="run the admission verifier daemon")
    p.add_argument("--listen")
    p.add_argument("--cert-server")
    p.add_argument("--policy", type=Path)
    p.add_argument("--trust-store", type=Path)
    p.add_argument("--device-registry", type=Path)
    p.add_argument("--audit-log", type=Path)
    p.set_defaults(handler=cmd_verifierd)

    p = sub.add_parser("prover", help="boot a simulated device and request admission")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--inline", action="store_true")
    p.add_argument("--identity", type=Path, required=True)
    p.add_argument("--connect", required=True)
    p.add_argument("--tamper", choices=TAMPER_MODES)
    p.set_defaults(handler=cmd_prover)

    p = sub.add_parser("scenario", help="run a scenario file end to end")
    p.add_argument("file", type=Path)
    p.set_defaults(handler=cmd_scenario)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.command not in ("serve", "verifierd"):
        setup_logging(args.log_level or get_settings().LOG_LEVEL)

    handler: Callable[[argparse.Namespace], Any] = args.handler
    try:
        result = handler(args)
    except UsageError as e:
        _emit(failure(e.error_code, e.message), args.human)
        return EXIT_USAGE
    except _ReportedFailure as e:
        _emit(e.document, args.human)
        return EXIT_ERROR
    except AppError as e:
        log.debug("cli.error command=%s error=%s", args.command, e.error_code)
        _emit(failure(e.error_code, e.message), args.human)
        return EXIT_ERROR
    except ValidationError as e:
        _emit(failure("ParseError", str(e.errors()[0].get("msg", e))), args.human)
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_OK
    except OSError as e:
        _emit(failure("IOError", str(e)), args.human)
        return EXIT_ERROR

    if result is not None:
        _emit(result, args.human)
    if args.command == "prover" and isinstance(result, dict) and result.get("type") == "error":
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
