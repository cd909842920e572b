"""Frozen material for the demo environments.

Every host, package, advisory weight, and expected artifact tally lives
here as plain data; the generator only materialises it. Counts downstream
(report tables, benchmark payloads) trace back to these constants.
"""

from __future__ import annotations

__all__ = [
    "GROUP_ORDER",
    "GROUP_TARGETS",
    "HOST_ALGORITHMS",
    "HOST_TARGETS",
    "MAIL_PIP",
    "MGMT_PIP",
    "MINIMAL_HOSTS",
    "ROLE_GROUPS",
    "SMB_HOSTS",
    "SMB_RELATIONSHIPS",
    "SPRING_POMS",
    "TOTAL_ADVISORIES",
    "USER_PACKAGES",
    "USER_VULN_WEIGHTS",
    "VULNERABLE_PACKAGES",
    "WEB_COMPOSER_DEPS",
    "WEB_COMPOSER_PROJECT",
    "WEB_NPM_DEPS",
    "WEB_NPM_PROJECT",
    "WEB_PIP",
]

# --------------------------------------------------------------------------
# topology

# host_id -> (role, segment)
SMB_HOSTS = {
    "web-01": ("web-server", "DMZ"),
    "app-01": ("microservice-host", "DMZ"),
    "mgmt-01": ("management-system", "LAN"),
    "mail-01": ("mail-server", "DMZ"),
    "user-01": ("user-workstation", "LAN"),
    "user-02": ("user-workstation", "LAN"),
    "user-03": ("user-workstation", "LAN"),
}

SMB_RELATIONSHIPS = [
    ("app-01", "SERVES", "web-01"),
    ("web-01", "SERVES", "user-01"),
    ("web-01", "SERVES", "user-02"),
    ("web-01", "SERVES", "user-03"),
    ("mail-01", "SERVES", "user-01"),
    ("mail-01", "SERVES", "user-02"),
    ("mail-01", "SERVES", "user-03"),
    ("mgmt-01", "CONNECTS_TO", "web-01"),
    ("mgmt-01", "CONNECTS_TO", "app-01"),
    ("mgmt-01", "CONNECTS_TO", "mail-01"),
]

MINIMAL_HOSTS = {"solo-01": ("standalone", "LAN")}

ROLE_GROUPS = {
    "web-server": "Web server",
    "microservice-host": "Microservices",
    "management-system": "Management",
    "mail-server": "Mail",
    "user-workstation": "User workstations",
    "standalone": "Standalone",
}

GROUP_ORDER = ["Web server", "Microservices", "Management", "Mail", "User workstations"]

# --------------------------------------------------------------------------
# software inventories

WEB_NPM_PROJECT = ("corp-site", "2.4.0")
WEB_NPM_DEPS = [
    ("express", "4.17.1"),
    ("lodash", "4.17.20"),
    ("minimist", "1.2.5"),
    ("node-fetch", "2.6.0"),
    ("react", "17.0.2"),
    ("react-dom", "17.0.2"),
    ("axios", "0.27.2"),
    ("chalk", "4.1.2"),
    ("commander", "8.3.0"),
    ("debug", "4.3.3"),
    ("ms", "2.1.3"),
    ("semver", "7.3.5"),
    ("uuid", "8.3.2"),
    ("yargs", "17.3.1"),
    ("winston", "3.5.1"),
]

WEB_PIP = [
    ("flask", "2.0.1"),
    ("jinja2", "2.11.2"),
    ("pillow", "8.1.0"),
    ("werkzeug", "2.0.2"),
    ("click", "8.0.3"),
    ("itsdangerous", "2.0.1"),
    ("markupsafe", "2.0.1"),
    ("gunicorn", "20.1.0"),
]

WEB_COMPOSER_PROJECT = ("acme/corp-portal", "1.8.0")
WEB_COMPOSER_DEPS = [
    ("symfony/http-kernel", "4.4.0"),
    ("symfony/console", "4.4.30"),
    ("guzzlehttp/guzzle", "7.4.1"),
    ("monolog/monolog", "2.3.5"),
]

# artifact -> (version, [(dep, version), ...]); one pom per microservice
SPRING_POMS = [
    (
        "orders-service",
        "1.4.2",
        [("spring-boot-starter-web", "2.6.3"), ("jackson-databind", "2.13.1")],
    ),
    (
        "billing-service",
        "1.2.0",
        [("spring-boot-starter-data-jpa", "2.6.3"), ("postgresql", "42.3.1")],
    ),
    (
        "inventory-service",
        "2.0.1",
        [("spring-boot-starter-security", "2.6.3"), ("snakeyaml", "1.29")],
    ),
]

MGMT_PIP = [
    ("django", "3.2.10"),
    ("djangorestframework", "3.12.4"),
    ("celery", "5.1.2"),
    ("redis", "3.5.3"),
    ("requests", "2.25.1"),
    ("gunicorn", "20.0.4"),
]

MAIL_PIP = [
    ("dkimpy", "1.0.5"),
    ("pyspf", "2.0.14"),
    ("dnspython", "2.1.0"),
    ("authres", "1.2.0"),
]

# 25 internal tools per workstation; names are globally unique so one
# advisory can never match two hosts.
USER_PACKAGES = {
    "user-01": [
        ("insight-core", "2.3.1"),
        ("insight-cli", "2.3.1"),
        ("tablereader", "1.8.0"),
        ("chartkit", "0.9.4"),
        ("datactl", "3.1.2"),
        ("pyledger", "1.2.7"),
        ("statsmill", "0.6.0"),
        ("rowcache", "2.0.3"),
        ("querypad", "1.4.9"),
        ("dashgen", "0.12.1"),
        ("plotfmt", "1.0.6"),
        ("csvlint", "2.2.0"),
        ("parqtool", "0.8.5"),
        ("schemadoc", "1.1.3"),
        ("aggmerge", "0.4.2"),
        ("binpacker", "1.6.1"),
        ("timefold", "2.5.0"),
        ("samplerig", "0.3.8"),
        ("featureforge", "1.9.2"),
        ("labelkit", "0.7.7"),
        ("traindeck", "1.3.4"),
        ("evalharness", "0.5.9"),
        ("modelcard", "1.0.2"),
        ("runlogger", "2.1.6"),
        ("gridpilot", "0.2.3"),
    ],
    "user-02": [
        ("deskforms", "3.0.2"),
        ("notetaker", "1.5.8"),
        ("pdfmerge", "2.4.1"),
        ("inboxrules", "1.1.0"),
        ("calsyncer", "0.9.9"),
        ("meetbot", "2.2.5"),
        ("slidefmt", "1.0.4"),
        ("docstamp", "0.6.3"),
        ("printqueue", "3.3.0"),
        ("scanfetch", "1.2.2"),
        ("clipvault", "0.8.1"),
        ("passlocker", "2.7.0"),
        ("wifiprof", "1.4.6"),
        ("vpndialer", "3.1.1"),
        ("proxyconf", "0.5.5"),
        ("driveindex", "2.0.8"),
        ("sharemap", "1.3.3"),
        ("quotacheck", "0.7.2"),
        ("backupctl", "4.0.1"),
        ("restorekit", "1.8.4"),
        ("patchping", "0.4.7"),
        ("invreport", "2.6.2"),
        ("ticketcli", "1.1.9"),
        ("chatarchiver", "0.3.6"),
        ("screenrec", "2.9.0"),
    ],
    "user-03": [
        ("buildcache", "5.1.0"),
        ("lintrunner", "2.4.3"),
        ("covreport", "1.7.1"),
        ("depgraph", "3.2.6"),
        ("relnotes", "0.8.8"),
        ("tagbump", "1.0.5"),
        ("hookmgr", "2.1.2"),
        ("codesearch", "4.3.0"),
        ("reviewbot", "1.6.7"),
        ("mergetrain", "0.9.1"),
        ("flakyhunt", "1.2.4"),
        ("benchdiff", "0.5.2"),
        ("profviz", "2.0.6"),
        ("heapdumper", "1.4.0"),
        ("tracecat", "0.7.9"),
        ("logtailer", "3.0.3"),
        ("crashsort", "1.1.5"),
        ("symfetch", "0.6.6"),
        ("artifactpush", "2.3.8"),
        ("secretscan", "1.9.0"),
        ("licensecheck", "2.8.1"),
        ("containerlint", "0.4.4"),
        ("kernelwatch", "1.3.7"),
        ("fleetping", "0.2.9"),
        ("patchcar", "1.0.0"),
    ],
}

# advisory count per package position; each list pairs with USER_PACKAGES
USER_VULN_WEIGHTS = {
    "user-01": [5, 5, 4, 4, 4, 3, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 0],
    "user-02": [5, 4, 4, 4, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 0],
    "user-03": [4, 3, 3, 3, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
}


def _user_vulnerable() -> list[tuple[str, str, int]]:
    out = []
    for host in ("user-01", "user-02", "user-03"):
        for (name, version), weight in zip(USER_PACKAGES[host], USER_VULN_WEIGHTS[host]):
            if weight:
                out.append((name, version, weight))
    return out


# (package, exact affected release, number of advisories)
VULNERABLE_PACKAGES: list[tuple[str, str, int]] = [
    ("express", "4.17.1", 5),
    ("lodash", "4.17.20", 4),
    ("minimist", "1.2.5", 3),
    ("node-fetch", "2.6.0", 2),
    ("flask", "2.0.1", 3),
    ("jinja2", "2.11.2", 2),
    ("pillow", "8.1.0", 3),
    ("symfony/http-kernel", "4.4.0", 2),
    ("jackson-databind", "2.13.1", 4),
    ("snakeyaml", "1.29", 3),
    ("postgresql", "42.3.1", 2),
    ("spring-boot-starter-web", "2.6.3", 3),
    ("django", "3.2.10", 3),
    ("djangorestframework", "3.12.4", 1),
    ("celery", "5.1.2", 1),
    ("redis", "3.5.3", 1),
    ("requests", "2.25.1", 1),
] + _user_vulnerable()

TOTAL_ADVISORIES = sum(n for _, _, n in VULNERABLE_PACKAGES)

# --------------------------------------------------------------------------
# expected artifact tallies: (algorithms, vulnerabilities, components, certs)

HOST_TARGETS = {
    "web-01": (8, 24, 29, 1),
    "app-01": (8, 12, 9, 0),
    "mgmt-01": (10, 7, 6, 0),
    "mail-01": (9, 0, 4, 1),
    "user-01": (8, 60, 25, 1),
    "user-02": (8, 55, 25, 1),
    "user-03": (7, 38, 25, 1),
}

GROUP_TARGETS = {
    "Web server": (8, 24, 29, 1),
    "Microservices": (8, 12, 9, 0),
    "Management": (10, 7, 6, 0),
    "Mail": (9, 0, 4, 1),
    "User workstations": (23, 153, 75, 3),
}

HOST_ALGORITHMS = {
    "web-01": {
        "RSA-2048", "SHA-256", "AES-256", "SHA-384",
        "CHACHA20-POLY1305", "AES-128", "P-256", "ED25519",
    },
    "app-01": {
        "AES-128", "SHA-256", "AES-256", "RSA-4096",
        "SHA-512", "P-384", "X25519", "CHACHA20-POLY1305",
    },
    "mgmt-01": {
        "AES-128", "AES-192", "AES-256", "SHA-256", "SHA-384",
        "SHA-512", "RSA-2048", "RSA-3072", "P-256", "3DES",
    },
    "mail-01": {
        "RSA-2048", "SHA-256", "AES-256", "CHACHA20-POLY1305",
        "SHA-384", "AES-128", "P-256", "X25519", "ED25519",
    },
    "user-01": {
        "P-256", "SHA-256", "AES-128", "AES-256",
        "CHACHA20-POLY1305", "ED25519", "X25519", "SHA-384",
    },
    "user-02": {
        "RSA-2048", "SHA-256", "AES-256", "SHA-512",
        "RSA-4096", "P-384", "3DES", "MD5",
    },
    "user-03": {
        "RSA-3072", "SHA-384", "AES-128", "AES-192",
        "SHA-1", "P-521", "CHACHA20-POLY1305",
    },
}
