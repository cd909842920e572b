"""Canonical JSON serialization for the modeled CycloneDX 1.6 subset.

Canonical form: lexicographically sorted keys, components sorted by bom-ref,
dependencies by ref, vulnerabilities by CVE id, links by rendered URN, and
empty optional sections omitted (components stay present even when empty).
Identical document values therefore serialize to byte-identical text.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .model import (
    KIND_PROPERTY,
    AnalysisState,
    Bom,
    BomKind,
    BomLink,
    BomMetadata,
    BomValidationError,
    Component,
    ComponentType,
    Dependency,
    CryptoAssetKind,
    CryptoProperties,
    Severity,
    SubjectKind,
    Violation,
    VulnerabilityEntry,
    validate_bom,
)

BOM_FORMAT = "CycloneDX"
SPEC_VERSION = "1.6"

_TYPE_TO_JSON = {
    ComponentType.LIBRARY: "library",
    ComponentType.APPLICATION: "application",
    ComponentType.CRYPTO_ASSET: "cryptographic-asset",
    ComponentType.CERTIFICATE: "cryptographic-asset",
    ComponentType.FILE: "file",
    ComponentType.OPERATING_SYSTEM_SETTING: "data",
}
_ASSET_TO_JSON = {
    CryptoAssetKind.ALGORITHM: "algorithm",
    CryptoAssetKind.CERTIFICATE: "certificate",
    CryptoAssetKind.PROTOCOL: "protocol",
    CryptoAssetKind.KEY_MATERIAL: "related-crypto-material",
}
_ASSET_FROM_JSON = {v: k for k, v in _ASSET_TO_JSON.items()}
_SEVERITY_TO_JSON = {s: s.value.lower() for s in Severity}
_SEVERITY_FROM_JSON = {v: k for k, v in _SEVERITY_TO_JSON.items()}
_STATE_TO_JSON = {s: s.value.lower() for s in AnalysisState}
_STATE_FROM_JSON = {v: k for k, v in _STATE_TO_JSON.items()}
_SUBJECT_TO_JSON = {SubjectKind.HOST: "device", SubjectKind.PROFILE: "application"}
_SUBJECT_FROM_JSON = {v: k for k, v in _SUBJECT_TO_JSON.items()}


class BomParseError(ValueError):
    """Malformed JSON input; carries the decoder's position."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line} column {column})")


class BomSchemaError(ValueError):
    """Well-formed JSON that does not fit the modeled subset."""

    def __init__(self, violations: list[Violation]):
        self.violations = tuple(violations)
        detail = "; ".join(str(v) for v in violations)
        super().__init__(f"schema violations: {detail}")


def _crypto_to_dict(crypto: CryptoProperties) -> dict[str, Any]:
    out: dict[str, Any] = {"assetType": _ASSET_TO_JSON[crypto.asset_kind]}
    algo: dict[str, Any] = {}
    if crypto.asset_kind != CryptoAssetKind.PROTOCOL and crypto.algorithm_family:
        algo["family"] = crypto.algorithm_family
    if crypto.parameter_set:
        algo["parameterSetIdentifier"] = crypto.parameter_set
    if crypto.mode:
        algo["mode"] = crypto.mode
    if algo:
        out["algorithmProperties"] = algo
    if crypto.asset_kind == CryptoAssetKind.CERTIFICATE:
        out["certificateProperties"] = {
            "subjectName": crypto.certificate_subject,
            "issuerName": crypto.certificate_issuer,
            "notValidBefore": crypto.not_before,
            "notValidAfter": crypto.not_after,
            "signatureAlgorithmRef": crypto.signature_algorithm_ref,
        }
    if crypto.asset_kind == CryptoAssetKind.PROTOCOL:
        proto: dict[str, Any] = {"version": crypto.protocol_version}
        if crypto.algorithm_family:
            proto["type"] = crypto.algorithm_family.lower()
        if crypto.cipher_suite_refs:
            proto["cipherSuites"] = [{"algorithms": sorted(crypto.cipher_suite_refs)}]
        out["protocolProperties"] = proto
    return out


def _component_to_dict(comp: Component) -> dict[str, Any]:
    out: dict[str, Any] = {
        "bom-ref": comp.bom_ref,
        "type": _TYPE_TO_JSON[comp.component_type],
        "name": comp.name,
    }
    if comp.version:
        out["version"] = comp.version
    if comp.package_url:
        out["purl"] = comp.package_url
    if comp.crypto is not None:
        out["cryptoProperties"] = _crypto_to_dict(comp.crypto)
    return out


def _vuln_to_dict(vuln: VulnerabilityEntry) -> dict[str, Any]:
    return {
        "id": vuln.cve_id,
        "ratings": [
            {
                "method": "CVSSv31",
                "score": vuln.cvss_score,
                "severity": _SEVERITY_TO_JSON[vuln.severity],
                "vector": vuln.cvss_vector,
            }
        ],
        "analysis": {"state": _STATE_TO_JSON[vuln.analysis_state]},
        "affects": [{"ref": ref} for ref in sorted(vuln.affects)],
    }


def bom_to_dict(bom: Bom) -> dict[str, Any]:
    """Canonically ordered plain-dict rendering (lists sorted, keys at dump time)."""
    properties = [(KIND_PROPERTY, bom.kind.value), *bom.metadata.properties]
    metadata: dict[str, Any] = {
        "component": {
            "type": _SUBJECT_TO_JSON[bom.metadata.subject_kind],
            "name": bom.metadata.subject_name,
        },
        "properties": [
            {"name": name, "value": value} for name, value in sorted(properties)
        ],
    }
    if bom.metadata.timestamp:
        metadata["timestamp"] = bom.metadata.timestamp

    doc: dict[str, Any] = {
        "bomFormat": BOM_FORMAT,
        "specVersion": SPEC_VERSION,
        "serialNumber": bom.serial_number,
        "version": bom.version,
        "metadata": metadata,
        "components": [
            _component_to_dict(c) for c in sorted(bom.components, key=lambda c: c.bom_ref)
        ],
    }
    if bom.dependencies:
        doc["dependencies"] = [
            {"ref": d.ref, "dependsOn": sorted(d.depends_on)}
            for d in sorted(bom.dependencies, key=lambda d: d.ref)
        ]
    if bom.vulnerabilities:
        doc["vulnerabilities"] = [
            _vuln_to_dict(v) for v in sorted(bom.vulnerabilities, key=lambda v: v.cve_id)
        ]
    if bom.links:
        doc["externalReferences"] = [
            {"type": "bom", "url": url}
            for url in sorted(link.render() for link in bom.links)
        ]
    for key, raw in bom.extras:
        doc[key] = json.loads(raw)
    return doc


def serialize_bom(bom: Bom) -> str:
    """Render the document; rejects invalid values outright, never emits partially."""
    violations = validate_bom(bom)
    if violations:
        raise BomValidationError(violations)
    return json.dumps(bom_to_dict(bom), sort_keys=True, separators=(",", ":"))


def _freeze_extra(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


class _Reader:
    """Walks one JSON object level, tracking which keys were consumed."""

    def __init__(self, data: dict[str, Any], path: str, violations: list[Violation]):
        self.data = data
        self.path = path
        self.violations = violations
        self.seen: set[str] = set()

    def take(self, key: str, kind: type, required: bool = False) -> Any:
        self.seen.add(key)
        if key not in self.data:
            if required:
                self.violations.append(
                    Violation(self.path or key, f"missing required field {key}")
                )
            return None
        value = self.data[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            self.violations.append(
                Violation(self._sub(key), f"expected {kind.__name__}")
            )
            return None
        return value

    def _sub(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def unknown(self) -> dict[str, Any]:
        return {k: v for k, v in self.data.items() if k not in self.seen}


def _parse_crypto(
    data: dict[str, Any], path: str, strict: bool, violations: list[Violation]
) -> Optional[CryptoProperties]:
    r = _Reader(data, path, violations)
    asset_raw = r.take("assetType", str, required=True)
    kind = _ASSET_FROM_JSON.get(asset_raw or "")
    if kind is None:
        violations.append(Violation(f"{path}.assetType", f"unknown asset type {asset_raw!r}"))
        return None
    family = parameter_set = mode = None
    algo = r.take("algorithmProperties", dict)
    if algo is not None:
        ar = _Reader(algo, f"{path}.algorithmProperties", violations)
        family = ar.take("family", str)
        parameter_set = ar.take("parameterSetIdentifier", str)
        mode = ar.take("mode", str)
        if strict:
            for key in ar.unknown():
                violations.append(
                    Violation(f"{path}.algorithmProperties.{key}", "unknown field")
                )
    cert_kwargs: dict[str, Any] = {}
    cert = r.take("certificateProperties", dict)
    if cert is not None:
        cr = _Reader(cert, f"{path}.certificateProperties", violations)
        cert_kwargs = {
            "certificate_subject": cr.take("subjectName", str),
            "certificate_issuer": cr.take("issuerName", str),
            "not_before": cr.take("notValidBefore", str),
            "not_after": cr.take("notValidAfter", str),
            "signature_algorithm_ref": cr.take("signatureAlgorithmRef", str),
        }
        if strict:
            for key in cr.unknown():
                violations.append(
                    Violation(f"{path}.certificateProperties.{key}", "unknown field")
                )
    protocol_version = None
    suites: tuple[str, ...] = ()
    proto = r.take("protocolProperties", dict)
    if proto is not None:
        pr = _Reader(proto, f"{path}.protocolProperties", violations)
        protocol_version = pr.take("version", str)
        ptype = pr.take("type", str)
        if ptype:
            family = ptype.upper()
        raw_suites = pr.take("cipherSuites", list)
        if raw_suites is not None:
            collected: list[str] = []
            for entry in raw_suites:
                if isinstance(entry, dict):
                    collected.extend(a for a in entry.get("algorithms", []) if isinstance(a, str))
            suites = tuple(collected)
        if strict:
            for key in pr.unknown():
                violations.append(
                    Violation(f"{path}.protocolProperties.{key}", "unknown field")
                )
    if strict:
        for key in r.unknown():
            violations.append(Violation(f"{path}.{key}", "unknown field"))
    return CryptoProperties(
        asset_kind=kind,
        algorithm_family=family,
        parameter_set=parameter_set,
        mode=mode,
        protocol_version=protocol_version,
        cipher_suite_refs=suites,
        **cert_kwargs,
    )


def _parse_component(
    data: dict[str, Any], path: str, strict: bool, violations: list[Violation]
) -> Optional[Component]:
    r = _Reader(data, path, violations)
    bom_ref = r.take("bom-ref", str, required=True)
    type_raw = r.take("type", str, required=True)
    name = r.take("name", str, required=True)
    version = r.take("version", str) or ""
    purl = r.take("purl", str)
    crypto = None
    crypto_raw = r.take("cryptoProperties", dict)
    if crypto_raw is not None:
        crypto = _parse_crypto(crypto_raw, f"{path}.cryptoProperties", strict, violations)
    unknown = r.unknown()
    if unknown and strict:
        for key in unknown:
            violations.append(Violation(f"{path}.{key}", "unknown field"))
    if bom_ref is None or type_raw is None or name is None:
        return None

    if type_raw == "cryptographic-asset":
        if crypto is not None and crypto.asset_kind == CryptoAssetKind.CERTIFICATE:
            ctype = ComponentType.CERTIFICATE
        else:
            ctype = ComponentType.CRYPTO_ASSET
    elif type_raw == "library":
        ctype = ComponentType.LIBRARY
    elif type_raw == "application":
        ctype = ComponentType.APPLICATION
    elif type_raw == "file":
        ctype = ComponentType.FILE
    elif type_raw == "data":
        ctype = ComponentType.OPERATING_SYSTEM_SETTING
    else:
        violations.append(Violation(f"{path}.type", f"unknown component type {type_raw!r}"))
        return None
    return Component(
        bom_ref=bom_ref,
        name=name,
        component_type=ctype,
        version=version,
        package_url=purl,
        crypto=crypto,
    )


def _parse_vulnerability(
    data: dict[str, Any], path: str, strict: bool, violations: list[Violation]
) -> Optional[VulnerabilityEntry]:
    r = _Reader(data, path, violations)
    cve_id = r.take("id", str, required=True)
    ratings = r.take("ratings", list, required=True) or []
    score = 0.0
    vector = ""
    severity = Severity.NONE
    if ratings:
        first = ratings[0] if isinstance(ratings[0], dict) else {}
        rr = _Reader(first, f"{path}.ratings[0]", violations)
        score = rr.take("score", float, required=True) or 0.0
        vector = rr.take("vector", str) or ""
        rr.take("method", str)
        sev_raw = rr.take("severity", str, required=True)
        sev = _SEVERITY_FROM_JSON.get(sev_raw or "")
        if sev is None:
            violations.append(
                Violation(f"{path}.ratings[0].severity", f"unknown severity {sev_raw!r}")
            )
        else:
            severity = sev
    else:
        violations.append(Violation(f"{path}.ratings", "must carry one CVSS rating"))
    state = AnalysisState.IN_TRIAGE
    analysis = r.take("analysis", dict)
    if analysis is not None:
        state_raw = analysis.get("state")
        parsed_state = _STATE_FROM_JSON.get(state_raw or "")
        if parsed_state is None:
            violations.append(
                Violation(f"{path}.analysis.state", f"unknown state {state_raw!r}")
            )
        else:
            state = parsed_state
    affects_raw = r.take("affects", list, required=True) or []
    affects: list[str] = []
    for entry in affects_raw:
        if isinstance(entry, dict) and isinstance(entry.get("ref"), str):
            affects.append(entry["ref"])
        else:
            violations.append(Violation(f"{path}.affects", "entries must be {ref: string}"))
    if strict:
        for key in r.unknown():
            violations.append(Violation(f"{path}.{key}", "unknown field"))
    if cve_id is None:
        return None
    return VulnerabilityEntry(
        cve_id=cve_id,
        cvss_score=score,
        cvss_vector=vector,
        severity=severity,
        affects=tuple(affects),
        analysis_state=state,
    )


def parse_bom(text: str, strict: bool = True) -> Bom:
    """Inverse of serialize_bom.

    Strict mode rejects unknown fields; lenient mode preserves document-,
    metadata-, and component-level extensions opaquely in `extras`.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BomParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise BomSchemaError([Violation("", "document root must be a JSON object")])

    violations: list[Violation] = []
    r = _Reader(data, "", violations)
    bom_format = r.take("bomFormat", str, required=True)
    if bom_format is not None and bom_format != BOM_FORMAT:
        violations.append(Violation("bomFormat", f"expected {BOM_FORMAT!r}"))
    spec_version = r.take("specVersion", str, required=True)
    if spec_version is not None and spec_version != SPEC_VERSION:
        violations.append(Violation("specVersion", f"unsupported version {spec_version!r}"))
    serial = r.take("serialNumber", str, required=True)
    version = r.take("version", int, required=True)

    metadata = BomMetadata(subject_kind=SubjectKind.PROFILE, subject_name="")
    kind: Optional[BomKind] = None
    meta_raw = r.take("metadata", dict, required=True)
    if meta_raw is not None:
        mr = _Reader(meta_raw, "metadata", violations)
        subject_kind = SubjectKind.PROFILE
        subject_name = ""
        comp_raw = mr.take("component", dict, required=True)
        if comp_raw is not None:
            sk = _SUBJECT_FROM_JSON.get(comp_raw.get("type", ""))
            if sk is None:
                violations.append(Violation("metadata.component.type", "unknown subject type"))
            else:
                subject_kind = sk
            if isinstance(comp_raw.get("name"), str):
                subject_name = comp_raw["name"]
            else:
                violations.append(Violation("metadata.component.name", "missing subject name"))
        timestamp = mr.take("timestamp", str)
        props: list[tuple[str, str]] = []
        props_raw = mr.take("properties", list) or []
        for i, entry in enumerate(props_raw):
            if (
                isinstance(entry, dict)
                and isinstance(entry.get("name"), str)
                and isinstance(entry.get("value"), str)
            ):
                if entry["name"] == KIND_PROPERTY:
                    try:
                        kind = BomKind(entry["value"])
                    except ValueError:
                        violations.append(
                            Violation(f"metadata.properties[{i}]", "unknown bom kind")
                        )
                else:
                    props.append((entry["name"], entry["value"]))
            else:
                violations.append(
                    Violation(f"metadata.properties[{i}]", "entries must be {name, value}")
                )
        if strict:
            for key in mr.unknown():
                violations.append(Violation(f"metadata.{key}", "unknown field"))
        metadata = BomMetadata(
            subject_kind=subject_kind,
            subject_name=subject_name,
            timestamp=timestamp,
            properties=tuple(props),
        )

    if kind is None:
        if strict:
            violations.append(
                Violation("metadata.properties", f"missing required property {KIND_PROPERTY}")
            )
        kind = kind or BomKind.MIXED

    components: list[Component] = []
    comps_raw = r.take("components", list, required=True) or []
    for i, entry in enumerate(comps_raw):
        if not isinstance(entry, dict):
            violations.append(Violation(f"components[{i}]", "must be an object"))
            continue
        comp = _parse_component(entry, f"components[{i}]", strict, violations)
        if comp is not None:
            components.append(comp)

    dependencies = []
    deps_raw = r.take("dependencies", list) or []
    for i, entry in enumerate(deps_raw):
        if not isinstance(entry, dict) or not isinstance(entry.get("ref"), str):
            violations.append(Violation(f"dependencies[{i}]", "must be {ref, dependsOn}"))
            continue
        depends_on = entry.get("dependsOn", [])
        if not isinstance(depends_on, list) or any(not isinstance(d, str) for d in depends_on):
            violations.append(Violation(f"dependencies[{i}].dependsOn", "must be a string list"))
            continue
        dependencies.append(Dependency(ref=entry["ref"], depends_on=tuple(depends_on)))

    vulnerabilities: list[VulnerabilityEntry] = []
    vulns_raw = r.take("vulnerabilities", list) or []
    for i, entry in enumerate(vulns_raw):
        if not isinstance(entry, dict):
            violations.append(Violation(f"vulnerabilities[{i}]", "must be an object"))
            continue
        vuln = _parse_vulnerability(entry, f"vulnerabilities[{i}]", strict, violations)
        if vuln is not None:
            vulnerabilities.append(vuln)

    links: list[BomLink] = []
    refs_raw = r.take("externalReferences", list) or []
    for i, entry in enumerate(refs_raw):
        if not isinstance(entry, dict) or entry.get("type") != "bom":
            violations.append(
                Violation(f"externalReferences[{i}]", "only {type: bom, url} references modeled")
            )
            continue
        try:
            links.append(BomLink.parse(entry.get("url", "")))
        except ValueError as exc:
            violations.append(Violation(f"externalReferences[{i}].url", str(exc)))

    extras: tuple[tuple[str, str], ...] = ()
    unknown = r.unknown()
    if unknown:
        if strict:
            for key in unknown:
                violations.append(Violation(key, "unknown field"))
        else:
            extras = tuple(sorted((k, _freeze_extra(v)) for k, v in unknown.items()))

    if violations:
        raise BomSchemaError(violations)

    bom = Bom(
        serial_number=serial,
        version=version,
        kind=kind,
        metadata=metadata,
        components=tuple(components),
        dependencies=tuple(dependencies),
        vulnerabilities=tuple(vulnerabilities),
        links=tuple(links),
        extras=extras,
    )
    deep = validate_bom(bom)
    if deep:
        raise BomSchemaError(deep)
    return bom
