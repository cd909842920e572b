"""Evidence collection: snapshots, scanners, normalization, non-intrusiveness."""

import hashlib
import json
import tarfile
from importlib import resources
from pathlib import Path

import pytest

from twinaudit.collect import (
    EvidenceCategory,
    HostSnapshot,
    SnapshotError,
    detect_algorithms,
    extract_algorithm_mentions,
    extract_protocol_mentions,
    scan_host,
)

FACTS = {
    "hostname": "web-01",
    "os": {"name": "debian", "version": "12"},
    "kernel": "6.1.0-18-amd64",
    "packages": {"openssl": "3.0.13", "libgcrypt20": "1.10.1", "curl": "7.88.1"},
}


def cert_pem(name: str) -> bytes:
    return (resources.files("twinaudit.fixtures") / "data" / name).read_bytes()


def write_tree(root: Path, files: dict[str, str | bytes]) -> Path:
    for rel, content in files.items():
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            target.write_bytes(content)
        else:
            target.write_text(content)
    return root


def sample_tree(root: Path) -> Path:
    return write_tree(
        root,
        {
            "facts.json": json.dumps(FACTS),
            "srv/app/requirements.txt": "flask==2.0.1\njinja2==2.11.2\n# comment\n",
            "srv/site/package.json": json.dumps(
                {"name": "corp-site", "version": "2.4.0", "dependencies": {"lodash": "^4.17.20"}}
            ),
            "srv/site/package-lock.json": json.dumps(
                {
                    "name": "corp-site",
                    "lockfileVersion": 3,
                    "packages": {
                        "": {"name": "corp-site", "version": "2.4.0"},
                        "node_modules/lodash": {"version": "4.17.20"},
                        "node_modules/express": {"version": "4.17.1"},
                    },
                }
            ),
            "etc/ssl/openssl.cnf": (
                "[system_default_sect]\n"
                "MinProtocol = TLSv1.2\n"
                "CipherString = ECDHE-RSA-AES256-GCM-SHA384:TLS_CHACHA20_POLY1305_SHA256\n"
            ),
            "etc/ssh/sshd_config": (
                "Port 22\n"
                "Ciphers aes128-ctr,aes256-gcm@openssh.com\n"
                "HostKeyAlgorithms ssh-ed25519\n"
            ),
            "etc/sysctl.conf": "net.ipv4.ip_forward = 0\nkernel.randomize_va_space = 2\n",
            "proc/sys/crypto/fips_enabled": "0\n",
            "var/log/auth.log": (
                "Jan 10 10:00:01 web-01 sshd[311]: Accepted publickey for admin "
                "from 10.0.0.5 port 50514 ssh2: ED25519 SHA256:abcdef\n"
                "Jan 10 10:05:44 web-01 sshd[390]: Failed password for root from 10.9.9.9\n"
            ),
            "etc/ssl/certs/web-01.pem": cert_pem("web-01.pem"),
        },
    )


def tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestSnapshot:
    def test_requires_facts(self, tmp_path):
        (tmp_path / "etc").mkdir()
        with pytest.raises(SnapshotError):
            HostSnapshot.open(tmp_path)

    def test_missing_path(self, tmp_path):
        with pytest.raises(SnapshotError):
            HostSnapshot.open(tmp_path / "ghost")

    def test_directory_and_tar_are_equivalent(self, tmp_path):
        tree = sample_tree(tmp_path / "web-01")
        archive = tmp_path / "web-01.tar.gz"
        with tarfile.open(archive, "w:gz") as tar:
            tar.add(tree, arcname=".")
        from_dir = HostSnapshot.open(tree)
        from_tar = HostSnapshot.open(archive)
        assert from_dir.iter_files() == from_tar.iter_files()
        assert from_dir.hostname == from_tar.hostname == "web-01"
        for path in from_dir.iter_files():
            assert from_dir.read_bytes(path) == from_tar.read_bytes(path)

    def test_read_is_the_only_access(self, tmp_path):
        snapshot = HostSnapshot.open(sample_tree(tmp_path / "web-01"))
        assert not any(
            name.startswith(("write", "delete", "remove", "unlink", "mkdir"))
            for name in dir(snapshot)
        )


class TestTokenExtraction:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Ciphers aes128-ctr", {"AES-128"}),
            ("TLS_AES_256_GCM_SHA384", {"AES-256", "SHA-384"}),
            ("ECDHE-RSA-AES256-GCM-SHA384", {"AES-256", "SHA-384"}),
            ("TLS_CHACHA20_POLY1305_SHA256", {"CHACHA20-POLY1305", "SHA-256"}),
            ("hmac-sha2-512,hmac-sha1", {"SHA-512", "SHA-1"}),
            ("KexAlgorithms curve25519-sha256,ecdh-sha2-nistp384", {"X25519", "SHA-256", "P-384"}),
            ("HostKeyAlgorithms ssh-ed25519,rsa-sha2-256", {"ED25519", "SHA-256"}),
            ("3des-cbc legacy cipher", {"3DES"}),
            ("prime256v1 and secp521r1", {"P-256", "P-521"}),
            ("rsa_4096 key with md5 digest", {"RSA-4096", "MD5"}),
            ("nothing cryptographic here", set()),
            ("plain RSA and bare SHA stay unmapped", set()),
        ],
    )
    def test_spellings(self, text, expected):
        assert {m.token.name for m in extract_algorithm_mentions(text)} == expected

    def test_mode_capture(self):
        mentions = {m.token.name: m.mode for m in extract_algorithm_mentions("aes-256-gcm")}
        assert mentions == {"AES-256": "gcm"}

    def test_protocols(self):
        assert extract_protocol_mentions("MinProtocol = TLSv1.2") == [("TLS", "1.2")]
        assert ("TLS", "1.3") in extract_protocol_mentions("tls 1.3 enabled")


class TestScanHost:
    @pytest.fixture()
    def bundle(self, tmp_path):
        return scan_host(HostSnapshot.open(sample_tree(tmp_path / "web-01")))

    def test_software_components(self, bundle):
        records = bundle.by_category(EvidenceCategory.SOFTWARE_COMPONENT)
        names = {(r.name, r.version) for r in records}
        assert ("flask", "2.0.1") in names
        assert ("corp-site", "2.4.0") in names
        assert ("express", "4.17.1") in names
        assert ("lodash", "4.17.20") in names
        roles = {r.name: r.attribute("role") for r in records}
        assert roles["corp-site"] == "project"
        assert roles["flask"] == "dependency"

    def test_crypto_libraries_from_facts(self, bundle):
        libs = {r.name: r.version for r in bundle.by_category(EvidenceCategory.CRYPTO_LIBRARY)}
        assert libs == {"openssl": "3.0.13", "libgcrypt20": "1.10.1"}

    def test_certificate_record(self, bundle):
        certs = bundle.by_category(EvidenceCategory.CERTIFICATE)
        assert len(certs) == 1
        cert = certs[0]
        assert cert.name == "web-01.example.test"
        assert cert.attribute("key_algorithm") == "rsa"
        assert cert.attribute("key_size") == "2048"
        assert "2024" in cert.attribute("not_before")

    def test_algorithms_deduplicated(self, bundle):
        algos = {r.name for r in bundle.by_category(EvidenceCategory.ALGORITHM)}
        assert algos == {
            "RSA-2048",
            "SHA-256",
            "AES-256",
            "SHA-384",
            "CHACHA20-POLY1305",
            "AES-128",
            "ED25519",
        }
        # Each token appears exactly once however many sources mentioned it.
        sha256 = [r for r in bundle.by_category(EvidenceCategory.ALGORITHM) if r.name == "SHA-256"]
        assert len(sha256) == 1
        assert len(sha256[0].attribute("sources").split(",")) >= 2

    def test_protocol_records(self, bundle):
        protocols = {
            (r.name, r.version)
            for r in bundle.by_category(EvidenceCategory.OPENSSL_CONFIG)
            if r.attribute("kind") == "protocol"
        }
        assert protocols == {("TLS", "1.2"), ("SSH", "2")}

    def test_kernel_settings(self, bundle):
        settings = {r.name: r.attribute("value") for r in bundle.by_category(EvidenceCategory.KERNEL_SETTING)}
        assert settings["net.ipv4.ip_forward"] == "0"
        assert settings["crypto.fips_enabled"] == "0"

    def test_log_events(self, bundle):
        events = bundle.by_category(EvidenceCategory.SYSTEM_LOG_EVENT)
        kinds = sorted(r.name for r in events)
        assert kinds == ["auth-accepted", "auth-failed"]

    def test_scan_does_not_touch_snapshot(self, tmp_path):
        tree = sample_tree(tmp_path / "web-01")
        before = tree_digest(tree)
        scan_host(HostSnapshot.open(tree))
        assert tree_digest(tree) == before

    def test_scan_is_deterministic(self, tmp_path):
        tree = sample_tree(tmp_path / "web-01")
        first = scan_host(HostSnapshot.open(tree))
        second = scan_host(HostSnapshot.open(tree))
        assert first == second


class TestDetectAlgorithms:
    def test_merges_modes_and_sources(self, tmp_path):
        tree = write_tree(
            tmp_path / "h",
            {
                "facts.json": json.dumps({"hostname": "h"}),
                "etc/ssl/openssl.cnf": "CipherString = AES128-GCM-SHA256\n",
                "etc/ssh/sshd_config": "Ciphers aes128-cbc\n",
            },
        )
        bundle = scan_host(HostSnapshot.open(tree))
        aes = [r for r in bundle.by_category(EvidenceCategory.ALGORITHM) if r.name == "AES-128"]
        assert len(aes) == 1
        assert aes[0].attribute("modes") == "cbc,gcm"
        assert aes[0].attribute("sources") == "etc/ssh/sshd_config,etc/ssl/openssl.cnf"
        assert aes[0].attribute("family") == "AES"

    def test_ignores_non_algorithm_records(self):
        assert detect_algorithms([]) == []
