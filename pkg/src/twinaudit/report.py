"""Human-readable audit reports rendered from forged documents.

All tallies come from count_artifacts; the report never counts on its own.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Iterable, Optional

from .bom import Bom, ComponentType, VulnerabilityEntry
from .forge import ArtifactCounts, count_artifacts

__all__ = ["render_report", "report_counts"]

_COUNT_COLUMNS = ("Algorithms", "Vulnerabilities", "Components", "Certificates")


def _counts_row(label: str, counts: ArtifactCounts) -> str:
    return (
        f"| {label} | {counts.algorithms} | {counts.vulnerabilities}"
        f" | {counts.components} | {counts.certificates} |"
    )


def _counts_table(
    rows: list[tuple[str, ArtifactCounts]], total: ArtifactCounts, label: str
) -> list[str]:
    header = "| " + " | ".join((label,) + _COUNT_COLUMNS) + " |"
    rule = "|---" + "|---:" * len(_COUNT_COLUMNS) + "|"
    lines = [header, rule]
    lines += [_counts_row(label, counts) for label, counts in rows]
    lines.append(_counts_row("**Total**", total))
    return lines


def _group_counts(
    counts: dict[str, ArtifactCounts],
    roles: dict[str, str],
    group_labels: Optional[dict[str, str]],
) -> dict[str, ArtifactCounts]:
    labels = group_labels or {}
    grouped: dict[str, ArtifactCounts] = {}
    for host, tally in counts.items():
        role = roles.get(host, "unassigned")
        label = labels.get(role, role)
        grouped[label] = grouped.get(label, ArtifactCounts()) + tally
    return grouped


def _merged_vulnerabilities(boms: Iterable[Bom]) -> list[VulnerabilityEntry]:
    merged: dict[str, VulnerabilityEntry] = {}
    for bom in boms:
        for entry in bom.vulnerabilities:
            known = merged.get(entry.cve_id)
            if known is None:
                merged[entry.cve_id] = entry
            else:
                base = known if known.cvss_score >= entry.cvss_score else entry
                merged[entry.cve_id] = VulnerabilityEntry(
                    cve_id=base.cve_id,
                    cvss_score=base.cvss_score,
                    cvss_vector=base.cvss_vector,
                    severity=base.severity,
                    affects=tuple(set(known.affects) | set(entry.affects)),
                    analysis_state=base.analysis_state,
                )
    return sorted(merged.values(), key=lambda v: (-v.cvss_score, v.cve_id))


def report_counts(
    boms: list[Bom],
    roles: Optional[dict[str, str]] = None,
    group_labels: Optional[dict[str, str]] = None,
) -> dict:
    """Machine-readable tally block: per host, per group, and total."""
    counts, total = count_artifacts(boms)

    def as_dict(c: ArtifactCounts) -> dict:
        return {
            "algorithms": c.algorithms,
            "vulnerabilities": c.vulnerabilities,
            "components": c.components,
            "certificates": c.certificates,
        }

    doc = {
        "hosts": {host: as_dict(c) for host, c in counts.items()},
        "total": as_dict(total),
    }
    if roles:
        grouped = _group_counts(counts, roles, group_labels)
        doc["groups"] = {label: as_dict(c) for label, c in sorted(grouped.items())}
    return doc


def render_report(
    boms: list[Bom],
    roles: Optional[dict[str, str]] = None,
    group_labels: Optional[dict[str, str]] = None,
    group_order: Optional[list[str]] = None,
    top: int = 10,
    now: Optional[str] = None,
) -> str:
    """Markdown report: tallies, worst vulnerabilities, certificate expiry."""
    counts, total = count_artifacts(boms)
    now = now or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    lines: list[str] = ["# Audit report", ""]

    if roles:
        grouped = _group_counts(counts, roles, group_labels)
        ordered: list[tuple[str, ArtifactCounts]] = []
        for label in group_order or []:
            if label in grouped:
                ordered.append((label, grouped.pop(label)))
        ordered += sorted(grouped.items())
        lines += ["## Artifact counts by host group", ""]
        lines += _counts_table(ordered, total, "Host group")
        lines.append("")

    lines += ["## Artifact counts by host", ""]
    lines += _counts_table(sorted(counts.items()), total, "Host")
    lines.append("")

    vulnerabilities = _merged_vulnerabilities(boms)
    lines += [f"## Top vulnerabilities ({min(top, len(vulnerabilities))} of {len(vulnerabilities)})", ""]
    if vulnerabilities:
        lines += [
            "| CVE | CVSS | Severity | Affected components |",
            "|---|---:|---|---:|",
        ]
        for entry in vulnerabilities[:top]:
            lines.append(
                f"| {entry.cve_id} | {entry.cvss_score:.1f}"
                f" | {entry.severity.value} | {len(entry.affects)} |"
            )
    else:
        lines.append("No known vulnerabilities matched the inventory.")
    lines.append("")

    certificates = []
    for bom in boms:
        for component in bom.components:
            if component.component_type == ComponentType.CERTIFICATE and component.crypto:
                certificates.append((bom.metadata.subject_name, component))
    lines += ["## Certificates", ""]
    if certificates:
        lines += [
            "| Host | Subject | Not valid after | Status |",
            "|---|---|---|---|",
        ]
        for host, component in sorted(certificates, key=lambda t: (t[0], t[1].bom_ref)):
            not_after = component.crypto.not_after or ""
            status = "EXPIRED" if not_after and not_after <= now else "valid"
            subject = component.crypto.certificate_subject or component.name
            lines.append(f"| {host} | {subject} | {not_after} | {status} |")
    else:
        lines.append("No certificates observed.")
    lines.append("")
    return "\n".join(lines)
