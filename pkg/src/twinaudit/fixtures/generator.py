"""Materialise demo environments as captured host trees plus side files.

The same seed always produces byte-identical output; different seeds vary
only cosmetic content (capture dates, filler log lines, comments), never
anything a scanner counts.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Union

from . import data_path
from .catalog import (
    MAIL_PIP,
    MGMT_PIP,
    MINIMAL_HOSTS,
    SMB_HOSTS,
    SMB_RELATIONSHIPS,
    SPRING_POMS,
    USER_PACKAGES,
    VULNERABLE_PACKAGES,
    WEB_COMPOSER_DEPS,
    WEB_COMPOSER_PROJECT,
    WEB_NPM_DEPS,
    WEB_NPM_PROJECT,
    WEB_PIP,
)

__all__ = ["FIXTURE_SPECS", "bump_patch", "feed_lines", "generate"]

FIXTURE_SPECS = ("smb", "minimal")

_YEARS = (2020, 2021, 2022, 2023, 2019)

_SCORES = [
    (9.8, "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
    (7.5, "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:H"),
    (5.3, "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N"),
    (8.1, "CVSS:3.1/AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:H/A:H"),
    (6.5, "CVSS:3.1/AV:N/AC:L/PR:N/UI:R/S:U/C:H/I:N/A:N"),
    (4.3, "CVSS:3.1/AV:N/AC:L/PR:N/UI:R/S:U/C:N/I:L/A:N"),
    (9.1, "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:N"),
    (7.2, "CVSS:3.1/AV:N/AC:L/PR:H/UI:N/S:U/C:H/I:H/A:H"),
    (5.9, "CVSS:3.1/AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:N"),
    (6.1, "CVSS:3.1/AV:N/AC:L/PR:N/UI:R/S:C/C:L/I:L/A:N"),
]

_SUMMARIES = [
    "improper input validation in request parsing",
    "denial of service via crafted payload",
    "path traversal in archive handling",
    "prototype pollution through merge options",
    "regular expression denial of service",
    "heap buffer over-read when decoding data",
    "privilege escalation through unsafe defaults",
    "information disclosure in error responses",
    "injection via unsanitized template input",
    "integer overflow in length handling",
]

_FILLER_LOG_LINES = [
    "systemd[1]: Starting Daily apt download activities...",
    "systemd[1]: Finished Rotate log files.",
    "CRON[4412]: (root) CMD (test -x /usr/sbin/anacron || run-parts /etc/cron.daily)",
    "systemd-timesyncd[611]: Initial synchronization to time server 10.0.0.1:123.",
    "kernel: [ 1092.441] perf: interrupt took too long, lowering kernel.perf_event_max_sample_rate",
    "dbus-daemon[702]: Successfully activated service 'org.freedesktop.hostname1'",
]


def bump_patch(version: str) -> str:
    """Next release after the given one: 4.17.20 -> 4.17.21, 1.29 -> 1.30."""
    parts = version.split(".")
    parts[-1] = str(int(parts[-1]) + 1)
    return ".".join(parts)


def feed_lines() -> list[str]:
    """The advisory feed, one JSON object per line, fully deterministic."""
    lines = []
    index = 0
    for name, version, count in VULNERABLE_PACKAGES:
        for _ in range(count):
            score, vector = _SCORES[index % len(_SCORES)]
            record = {
                "cve": f"CVE-{_YEARS[index % len(_YEARS)]}-{30000 + index}",
                "summary": f"{name}: {_SUMMARIES[index % len(_SUMMARIES)]}",
                "cvss": {"score": score, "vector": vector},
                "affects": [
                    {"name": name, "introduced": version, "fixed": bump_patch(version)}
                ],
            }
            lines.append(json.dumps(record, sort_keys=True))
            index += 1
    return lines


# --------------------------------------------------------------------------
# file templates


def _facts(hostname: str, rng: random.Random, packages: dict) -> str:
    day = rng.randrange(1, 29)
    hour, minute, second = rng.randrange(24), rng.randrange(60), rng.randrange(60)
    facts = {
        "hostname": hostname,
        "captured_at": f"2026-07-{day:02d}T{hour:02d}:{minute:02d}:{second:02d}Z",
        "os": {"name": "Ubuntu", "version": "20.04.6"},
        "packages": packages,
    }
    return json.dumps(facts, indent=1, sort_keys=True) + "\n"


def _requirements(packages) -> str:
    return "".join(f"{name}=={version}\n" for name, version in packages)


def _package_json(project, deps) -> str:
    name, version = project
    doc = {
        "name": name,
        "version": version,
        "private": True,
        "dependencies": {dep: f"^{ver}" for dep, ver in deps},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _package_lock(project, deps) -> str:
    name, version = project
    packages = {"": {"name": name, "version": version}}
    for dep, ver in deps:
        packages[f"node_modules/{dep}"] = {"version": ver}
    doc = {"name": name, "version": version, "lockfileVersion": 3, "packages": packages}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _composer_json(project, deps) -> str:
    name, version = project
    doc = {
        "name": name,
        "version": version,
        "require": {dep: f"^{ver}" for dep, ver in deps},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _composer_lock(deps) -> str:
    doc = {"packages": [{"name": dep, "version": ver} for dep, ver in deps]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


_MAVEN_GROUPS = {
    "spring-boot-starter-web": "org.springframework.boot",
    "spring-boot-starter-data-jpa": "org.springframework.boot",
    "spring-boot-starter-security": "org.springframework.boot",
    "jackson-databind": "com.fasterxml.jackson.core",
    "postgresql": "org.postgresql",
    "snakeyaml": "org.yaml",
}


def _pom(artifact: str, version: str, deps) -> str:
    blocks = []
    for dep, ver in deps:
        group = _MAVEN_GROUPS.get(dep, "com.acme.platform")
        blocks.append(
            "    <dependency>\n"
            f"      <groupId>{group}</groupId>\n"
            f"      <artifactId>{dep}</artifactId>\n"
            f"      <version>{ver}</version>\n"
            "    </dependency>"
        )
    joined = "\n".join(blocks)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<project xmlns="http://maven.apache.org/POM/4.0.0">\n'
        "  <modelVersion>4.0.0</modelVersion>\n"
        "  <groupId>com.acme.platform</groupId>\n"
        f"  <artifactId>{artifact}</artifactId>\n"
        f"  <version>{version}</version>\n"
        "  <dependencies>\n"
        f"{joined}\n"
        "  </dependencies>\n"
        "</project>\n"
    )


def _sysctl(rng: random.Random, entries: dict) -> str:
    stamp = rng.getrandbits(32)
    lines = [f"# pushed by config management, change-id {stamp:08x}"]
    lines += [f"{key} = {value}" for key, value in entries.items()]
    return "\n".join(lines) + "\n"


def _log(rng: random.Random, hostname: str, crypto_lines) -> str:
    day = rng.randrange(1, 29)
    lines = []
    for offset, body in enumerate(crypto_lines):
        lines.append(f"Jul {day:02d} 0{offset + 1}:{rng.randrange(60):02d}:17 {hostname} {body}")
    for _ in range(rng.randrange(2, 5)):
        filler = rng.choice(_FILLER_LOG_LINES)
        lines.append(f"Jul {day:02d} 0{rng.randrange(1, 10)}:{rng.randrange(60):02d}:44 {hostname} {filler}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# per-host evidence material (frozen: every line here feeds a scanner)

_OS_PACKAGES = {"openssl": "1.1.1n", "libssl1.1": "1.1.1n", "ca-certificates": "20230311"}

_SERVER_SSH = {
    "web-01": "HostKeyAlgorithms ssh-ed25519\nCiphers chacha20-poly1305@openssh.com,aes256-gcm@openssh.com\n",
    "app-01": "HostKeyAlgorithms rsa-sha2-512\n",
    "mgmt-01": "Ciphers aes192-cbc,aes256-ctr\nHostKeyAlgorithms rsa-sha2-512,ssh-rsa\n",
    "mail-01": "HostKeyAlgorithms ssh-ed25519\n",
}

_CLIENT_SSH = {
    "user-01": (
        "Ciphers chacha20-poly1305@openssh.com,aes128-ctr,aes256-gcm@openssh.com\n"
        "KexAlgorithms curve25519-sha256\n"
        "HostKeyAlgorithms ssh-ed25519\n"
    ),
    "user-02": "Ciphers aes256-ctr,3des-cbc\nMACs hmac-sha2-512,hmac-md5\n",
    "user-03": "Ciphers aes128-cbc,aes192-ctr,chacha20-poly1305@openssh.com\nMACs hmac-sha1\n",
}

_OPENSSL_CNF = {
    "web-01": (
        "[system_default_sect]\n"
        "CipherString = ECDHE-RSA-AES256-GCM-SHA384:ECDHE-RSA-CHACHA20-POLY1305\n"
        "Ciphersuites = TLS_AES_128_GCM_SHA256\n"
        "Curves = P-256\n"
        "MinProtocol = TLSv1.2\n"
    ),
    "app-01": (
        "[system_default_sect]\n"
        "Ciphersuites = TLS_AES_128_GCM_SHA256:TLS_CHACHA20_POLY1305_SHA256\n"
        "CipherString = AES-256-CBC\n"
        "Curves = P-384:X25519\n"
        "MinProtocol = TLSv1.3\n"
    ),
    "mgmt-01": (
        "[system_default_sect]\n"
        "CipherString = ECDHE-RSA-AES128-GCM-SHA256:AES256-SHA384:DES-CBC3-SHA\n"
        "Curves = P-256\n"
        "MinProtocol = TLSv1.2\n"
    ),
    "mail-01": (
        "[system_default_sect]\n"
        "CipherString = ECDHE-RSA-AES256-GCM-SHA384:ECDHE-RSA-CHACHA20-POLY1305\n"
        "Ciphersuites = TLS_AES_128_GCM_SHA256\n"
        "Curves = P-256:X25519\n"
        "MinProtocol = TLSv1.2\n"
    ),
    "user-02": "[system_default_sect]\nCurves = P-384\n",
    "user-03": "[system_default_sect]\nCurves = P-521\n",
}

_CRYPTO_LOG_LINES = {
    "app-01": [
        "orders-service[330]: TLS handshake completed: peer key RSA-4096, cipher AES-256-GCM",
    ],
    "mgmt-01": [
        "sshd[812]: Accepted publickey for admin from 10.20.0.5 port 51514 ssh2: RSA-2048 SHA256:gXkqTr",
        "sshd[812]: Accepted publickey for svc-backup from 10.20.0.9 port 40112 ssh2: RSA-3072 SHA256:bQw1Zu",
    ],
    "user-01": [
        "netmon[204]: TLS handshake with mail.example.test using ECDHE-ECDSA-AES256-GCM-SHA384",
    ],
    "user-02": [
        "sshd[455]: Accepted publickey for carol from 192.168.12.34 port 50222 ssh2: RSA-4096 SHA256:pLm8Vd",
    ],
}

_SYSCTL = {
    "web-01": {"net.ipv4.tcp_syncookies": "1", "net.ipv4.conf.all.rp_filter": "1"},
    "app-01": {"vm.swappiness": "10", "net.core.somaxconn": "1024"},
    "mgmt-01": {"kernel.kptr_restrict": "2", "kernel.dmesg_restrict": "1"},
    "mail-01": {"net.ipv4.tcp_syncookies": "1"},
    "user-01": {"kernel.yama.ptrace_scope": "1"},
    "user-02": {"kernel.yama.ptrace_scope": "1"},
    "user-03": {"kernel.yama.ptrace_scope": "1"},
}

_CERT_FILES = {
    "web-01": "web-01.pem",
    "mail-01": "mail-01.pem",
    "user-01": "user-01.pem",
    "user-02": "user-02.pem",
    "user-03": "user-03.pem",
}


def _write(path: Path, content: Union[str, bytes]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(content, bytes):
        path.write_bytes(content)
    else:
        path.write_text(content, encoding="utf-8")


def _write_smb_host(root: Path, host: str, rng: random.Random) -> None:
    _write(root / "facts.json", _facts(host, rng, dict(_OS_PACKAGES)))
    _write(root / "etc" / "sysctl.conf", _sysctl(rng, _SYSCTL[host]))

    if host in _OPENSSL_CNF:
        _write(root / "etc" / "ssl" / "openssl.cnf", _OPENSSL_CNF[host])
    if host in _SERVER_SSH:
        _write(root / "etc" / "ssh" / "sshd_config", _SERVER_SSH[host])
    if host in _CLIENT_SSH:
        _write(root / "etc" / "ssh" / "ssh_config", _CLIENT_SSH[host])
    if host in _CERT_FILES:
        pem = data_path(_CERT_FILES[host]).read_bytes()
        _write(root / "etc" / "ssl" / "certs" / f"{host}.example.test.pem", pem)
    if host in _CRYPTO_LOG_LINES:
        log_name = "auth.log" if "sshd" in _CRYPTO_LOG_LINES[host][0] else "app.log"
        _write(root / "var" / "log" / log_name, _log(rng, host, _CRYPTO_LOG_LINES[host]))
    else:
        _write(root / "var" / "log" / "syslog.log", _log(rng, host, []))

    if host == "web-01":
        site = root / "srv" / "www" / "corp-site"
        _write(site / "package.json", _package_json(WEB_NPM_PROJECT, WEB_NPM_DEPS))
        _write(site / "package-lock.json", _package_lock(WEB_NPM_PROJECT, WEB_NPM_DEPS))
        _write(root / "srv" / "www" / "api" / "requirements.txt", _requirements(WEB_PIP))
        portal = root / "srv" / "www" / "portal"
        _write(portal / "composer.json", _composer_json(WEB_COMPOSER_PROJECT, WEB_COMPOSER_DEPS))
        _write(portal / "composer.lock", _composer_lock(WEB_COMPOSER_DEPS))
    elif host == "app-01":
        for artifact, version, deps in SPRING_POMS:
            _write(root / "srv" / "microservices" / artifact / "pom.xml",
                   _pom(artifact, version, deps))
    elif host == "mgmt-01":
        _write(root / "opt" / "mgmt" / "requirements.txt", _requirements(MGMT_PIP))
    elif host == "mail-01":
        _write(root / "opt" / "mailfilter" / "requirements.txt", _requirements(MAIL_PIP))
    elif host in USER_PACKAGES:
        _write(root / "home" / "dev" / "tools" / "requirements.txt",
               _requirements(USER_PACKAGES[host]))


def _write_minimal_host(root: Path, host: str, rng: random.Random) -> None:
    _write(root / "facts.json", _facts(host, rng, {"openssl": "1.1.1n"}))
    _write(root / "etc" / "sysctl.conf", _sysctl(rng, {"net.ipv4.tcp_syncookies": "1"}))
    _write(root / "etc" / "ssl" / "openssl.cnf",
           "[system_default_sect]\nCipherString = AES128-SHA256\nMinProtocol = TLSv1.2\n")
    _write(root / "opt" / "app" / "requirements.txt",
           _requirements([("tinyapp", "1.0.0"), ("miniweb", "0.3.2")]))


def _inventory(out: Path, hosts: dict, relationships) -> dict:
    return {
        "hosts": [
            {
                "host_id": host,
                "role": role,
                "segment": segment,
                "snapshot_ref": str(out / "snapshots" / host),
            }
            for host, (role, segment) in sorted(hosts.items())
        ],
        "relationships": [
            {"source": s, "kind": k, "target": t} for s, k, t in relationships
        ],
    }


_MINIMAL_FEED = [
    json.dumps(
        {
            "cve": "CVE-2023-29001",
            "summary": "tinyapp: denial of service via crafted payload",
            "cvss": {"score": 5.3, "vector": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N"},
            "affects": [{"name": "tinyapp", "introduced": "1.0.0", "fixed": "1.0.1"}],
        },
        sort_keys=True,
    )
]


def generate(spec: str, seed: int, out: Union[str, Path]) -> dict:
    """Write the whole environment under `out`; returns a path manifest."""
    if spec not in FIXTURE_SPECS:
        raise ValueError(f"unknown fixture spec {spec!r}; choose from {FIXTURE_SPECS}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    if spec == "smb":
        hosts, relationships, feed = SMB_HOSTS, SMB_RELATIONSHIPS, feed_lines()
        profile = {
            "profile_id": "smb-estate",
            "name": "SMB estate audit",
            "host_selector": [
                "web-server", "microservice-host", "management-system",
                "mail-server", "user-workstation",
            ],
            "categories": [],
            "sync_policy": {"kind": "ON_DEMAND"},
        }
    else:
        hosts, relationships, feed = MINIMAL_HOSTS, [], _MINIMAL_FEED
        profile = {
            "profile_id": "minimal",
            "name": "Single host",
            "host_selector": ["solo-01"],
            "categories": [],
            "sync_policy": {"kind": "ON_DEMAND"},
        }

    snapshot_paths = {}
    for host in sorted(hosts):
        host_root = out / "snapshots" / host
        if spec == "smb":
            _write_smb_host(host_root, host, rng)
        else:
            _write_minimal_host(host_root, host, rng)
        snapshot_paths[host] = str(host_root)

    inventory_path = out / "inventory.json"
    _write(inventory_path, json.dumps(_inventory(out, hosts, relationships), indent=1) + "\n")
    profile_path = out / "profile.json"
    _write(profile_path, json.dumps(profile, indent=1) + "\n")
    feed_path = out / "feed.ndjson"
    _write(feed_path, "\n".join(feed) + "\n")

    return {
        "spec": spec,
        "seed": seed,
        "root": str(out),
        "inventory": str(inventory_path),
        "profile": str(profile_path),
        "feed": str(feed_path),
        "profile_id": profile["profile_id"],
        "snapshots": snapshot_paths,
    }
