"""Config, kernel, log, and library scanners plus the host scan orchestrator.

Everything here only reads through the HostSnapshot facade. Raw algorithm
mentions carry one record per sighting; detect_algorithms folds them into
one record per canonical token with merged modes and source paths.
"""

from __future__ import annotations

import re
from typing import Iterable, Optional

from .certs import scan_certificates
from .manifests import scan_manifests
from .records import EvidenceBundle, EvidenceCategory, EvidenceRecord, make_record
from .snapshot import HostSnapshot
from .tokens import (
    AlgorithmMention,
    AlgorithmToken,
    extract_algorithm_mentions,
    extract_protocol_mentions,
)

KNOWN_CRYPTO_LIBRARIES = {
    "openssl",
    "libssl",
    "libssl1.1",
    "libssl3",
    "libcrypto",
    "gnutls",
    "libgnutls30",
    "libgcrypt",
    "libgcrypt20",
    "nss",
    "libnss3",
    "mbedtls",
    "libmbedtls",
    "wolfssl",
    "libsodium",
    "libsodium23",
    "botan",
    "bouncycastle",
}

OPENSSL_CONFIG_PATHS = ("etc/ssl/openssl.cnf", "usr/lib/ssl/openssl.cnf")
SSH_CONFIG_PATHS = ("etc/ssh/sshd_config", "etc/ssh/ssh_config")

_SSH_CRYPTO_DIRECTIVES = {
    "ciphers",
    "macs",
    "kexalgorithms",
    "hostkeyalgorithms",
    "pubkeyacceptedalgorithms",
    "pubkeyacceptedkeytypes",
    "protocol",
}

_LOG_EVENT_PATTERNS = [
    (re.compile(r"Accepted (publickey|password) for (\S+)"), "auth-accepted"),
    (re.compile(r"Failed (publickey|password) for (?:invalid user )?(\S+)"), "auth-failed"),
    (re.compile(r"session (opened|closed) for"), "session"),
    (re.compile(r"TLS.{0,40}handshake|handshake.{0,40}TLS"), "tls-handshake"),
]


def mention_record(host: str, source_path: str, mention: AlgorithmMention) -> EvidenceRecord:
    token = mention.token
    attributes = {
        "family": token.family,
        "primitive": token.primitive,
    }
    if token.parameter:
        attributes["parameter"] = token.parameter
    if mention.mode:
        attributes["mode"] = mention.mode
    return make_record(
        EvidenceCategory.ALGORITHM,
        name=token.name,
        host=host,
        source_path=source_path,
        attributes=attributes,
    )


def detect_algorithms(records: Iterable[EvidenceRecord]) -> list[EvidenceRecord]:
    """Fold raw algorithm sightings into one record per canonical token.

    Records that are not ALGORITHM evidence pass through untouched to the
    caller's discretion; they are simply ignored here.
    """
    folded: dict[str, dict] = {}
    for record in records:
        if record.category != EvidenceCategory.ALGORITHM:
            continue
        slot = folded.setdefault(
            record.name,
            {
                "host": record.host,
                "family": record.attribute("family") or "",
                "primitive": record.attribute("primitive") or "",
                "parameter": record.attribute("parameter") or "",
                "modes": set(),
                "sources": set(),
            },
        )
        slot["sources"].add(record.source_path)
        mode = record.attribute("mode")
        if mode:
            slot["modes"].add(mode)

    out = []
    for name in sorted(folded):
        slot = folded[name]
        sources = sorted(slot["sources"])
        attributes = {
            "family": slot["family"],
            "primitive": slot["primitive"],
            "sources": ",".join(sources),
        }
        if slot["parameter"]:
            attributes["parameter"] = slot["parameter"]
        if slot["modes"]:
            attributes["modes"] = ",".join(sorted(slot["modes"]))
        out.append(
            make_record(
                EvidenceCategory.ALGORITHM,
                name=name,
                host=slot["host"],
                source_path=sources[0],
                attributes=attributes,
            )
        )
    return out


def _directive_record(
    host: str, path: str, key: str, value: str, file_kind: str
) -> EvidenceRecord:
    return make_record(
        EvidenceCategory.OPENSSL_CONFIG,
        name=key,
        host=host,
        source_path=path,
        attributes={"kind": "directive", "value": value, "file": file_kind},
    )


def _protocol_record(host: str, path: str, name: str, version: str) -> EvidenceRecord:
    return make_record(
        EvidenceCategory.OPENSSL_CONFIG,
        name=name,
        host=host,
        source_path=path,
        version=version,
        attributes={"kind": "protocol"},
    )


def scan_openssl_config(
    snapshot: HostSnapshot, path: str
) -> tuple[list[EvidenceRecord], list[tuple[str, AlgorithmMention]]]:
    records: list[EvidenceRecord] = []
    mentions: list[tuple[str, AlgorithmMention]] = []
    seen_protocols: set[tuple[str, str]] = set()
    for line in snapshot.read_text(path).splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or "=" not in line:
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            continue
        records.append(_directive_record(snapshot.hostname, path, key, value, "openssl"))
        mentions.extend((path, m) for m in extract_algorithm_mentions(value))
        for proto, version in extract_protocol_mentions(value):
            if (proto, version) not in seen_protocols:
                seen_protocols.add((proto, version))
                records.append(_protocol_record(snapshot.hostname, path, proto, version))
    return records, mentions


def scan_ssh_config(
    snapshot: HostSnapshot, path: str
) -> tuple[list[EvidenceRecord], list[tuple[str, AlgorithmMention]]]:
    records: list[EvidenceRecord] = []
    mentions: list[tuple[str, AlgorithmMention]] = []
    saw_directive = False
    for line in snapshot.read_text(path).splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            continue
        key, value = parts
        if key.lower() not in _SSH_CRYPTO_DIRECTIVES:
            continue
        saw_directive = True
        records.append(_directive_record(snapshot.hostname, path, key, value, "ssh"))
        mentions.extend((path, m) for m in extract_algorithm_mentions(value))
    if saw_directive:
        records.append(_protocol_record(snapshot.hostname, path, "SSH", "2"))
    return records, mentions


def scan_kernel_settings(snapshot: HostSnapshot) -> list[EvidenceRecord]:
    records = []
    conf_paths = [p for p in ("etc/sysctl.conf",) if snapshot.exists(p)]
    conf_paths += snapshot.glob("etc/sysctl.d/*.conf")
    for path in conf_paths:
        for line in snapshot.read_text(path).splitlines():
            line = line.split("#", 1)[0].strip()
            if not line or "=" not in line:
                continue
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key:
                records.append(
                    make_record(
                        EvidenceCategory.KERNEL_SETTING,
                        name=key,
                        host=snapshot.hostname,
                        source_path=path,
                        attributes={"value": value},
                    )
                )
    for path in snapshot.glob("proc/sys/*"):
        name = path[len("proc/sys/"):].replace("/", ".")
        records.append(
            make_record(
                EvidenceCategory.KERNEL_SETTING,
                name=name,
                host=snapshot.hostname,
                source_path=path,
                attributes={"value": snapshot.read_text(path).strip()},
            )
        )
    return records


def scan_logs(
    snapshot: HostSnapshot,
) -> tuple[list[EvidenceRecord], list[tuple[str, AlgorithmMention]]]:
    records: list[EvidenceRecord] = []
    mentions: list[tuple[str, AlgorithmMention]] = []
    for path in snapshot.glob("var/log/*.log"):
        for line_number, line in enumerate(snapshot.read_text(path).splitlines(), start=1):
            for pattern, event in _LOG_EVENT_PATTERNS:
                match = pattern.search(line)
                if match is None:
                    continue
                records.append(
                    make_record(
                        EvidenceCategory.SYSTEM_LOG_EVENT,
                        name=event,
                        host=snapshot.hostname,
                        source_path=path,
                        attributes={
                            "line": str(line_number),
                            "excerpt": line.strip()[:160],
                        },
                    )
                )
                mentions.extend((path, m) for m in extract_algorithm_mentions(line))
                break
    return records, mentions


def scan_crypto_libraries(snapshot: HostSnapshot) -> list[EvidenceRecord]:
    records = []
    for name, version in sorted(snapshot.packages().items()):
        if name.lower() in KNOWN_CRYPTO_LIBRARIES:
            records.append(
                make_record(
                    EvidenceCategory.CRYPTO_LIBRARY,
                    name=name.lower(),
                    host=snapshot.hostname,
                    source_path="facts.json",
                    version=version,
                    attributes={"manager": "os"},
                )
            )
    return records


def scan_host(snapshot: HostSnapshot) -> EvidenceBundle:
    """Full non-intrusive evidence pass over one snapshot."""
    host = snapshot.hostname
    records: list[EvidenceRecord] = []
    raw_mentions: list[EvidenceRecord] = []

    records.extend(scan_manifests(snapshot))
    records.extend(scan_crypto_libraries(snapshot))

    cert_records, cert_tokens = scan_certificates(snapshot)
    records.extend(cert_records)
    raw_mentions.extend(
        mention_record(host, path, AlgorithmMention(token)) for path, token in cert_tokens
    )

    for path in OPENSSL_CONFIG_PATHS:
        if snapshot.exists(path):
            found, mentions = scan_openssl_config(snapshot, path)
            records.extend(found)
            raw_mentions.extend(mention_record(host, p, m) for p, m in mentions)
    for path in SSH_CONFIG_PATHS:
        if snapshot.exists(path):
            found, mentions = scan_ssh_config(snapshot, path)
            records.extend(found)
            raw_mentions.extend(mention_record(host, p, m) for p, m in mentions)

    records.extend(scan_kernel_settings(snapshot))

    log_records, log_mentions = scan_logs(snapshot)
    records.extend(log_records)
    raw_mentions.extend(mention_record(host, p, m) for p, m in log_mentions)

    records.extend(detect_algorithms(raw_mentions))
    return EvidenceBundle(host=host, records=tuple(records))
