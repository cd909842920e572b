"""Offline vulnerability store fed from NDJSON advisory snapshots.

One advisory per line: {"cve", "summary", "cvss": {"score", "vector"},
"affects": [{"name", "introduced", "fixed"}]}. Ranges are half-open:
introduced is inclusive, fixed exclusive; a missing bound leaves that side
open. Lookups normalize package names (case and -/_ separators) so feed and
inventory spellings do not have to agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from .bom.model import CVE_RE, Severity, severity_for_score


class FeedError(ValueError):
    """Malformed feed line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"feed line {line_number}: {message}")


def normalize_package_name(name: str) -> str:
    return name.strip().lower().replace("_", "-")


def parse_version(text: str) -> tuple[tuple[int, str], ...]:
    """Dotted segments as (numeric, suffix) pairs: "1.2rc1" -> ((1,""),(2,"rc1")).

    Missing digits count as 0, so purely alphabetic segments order by suffix
    alone. Comparisons pad the shorter version with (0, ""), making
    "1.2" == "1.2.0" and "1.2" < "1.2a".
    """
    segments = []
    for part in text.strip().split("."):
        digits = ""
        for ch in part:
            if ch.isdigit():
                digits += ch
            else:
                break
        suffix = part[len(digits):]
        segments.append((int(digits) if digits else 0, suffix))
    return tuple(segments)


def compare_versions(a: str, b: str) -> int:
    pa, pb = parse_version(a), parse_version(b)
    width = max(len(pa), len(pb))
    pa += ((0, ""),) * (width - len(pa))
    pb += ((0, ""),) * (width - len(pb))
    return (pa > pb) - (pa < pb)


@dataclass(frozen=True)
class VersionRange:
    introduced: Optional[str] = None
    fixed: Optional[str] = None

    def contains(self, version: str) -> bool:
        if not version:
            # Unversioned inventory entries only match advisories that affect
            # every version of the package.
            return self.introduced is None and self.fixed is None
        if self.introduced is not None and compare_versions(version, self.introduced) < 0:
            return False
        if self.fixed is not None and compare_versions(version, self.fixed) >= 0:
            return False
        return True


@dataclass(frozen=True)
class AffectedPackage:
    name: str
    ranges: tuple[VersionRange, ...]


@dataclass(frozen=True)
class Advisory:
    cve_id: str
    summary: str
    cvss_score: float
    cvss_vector: str
    severity: Severity
    affects: tuple[AffectedPackage, ...]

    def matches(self, name: str, version: str) -> bool:
        normalized = normalize_package_name(name)
        return any(
            pkg.name == normalized and any(r.contains(version) for r in pkg.ranges)
            for pkg in self.affects
        )


def _parse_record(line_number: int, data: dict) -> Advisory:
    cve = data.get("cve")
    if not isinstance(cve, str) or not CVE_RE.match(cve):
        raise FeedError(line_number, f"bad cve id {cve!r}")
    cvss = data.get("cvss")
    if not isinstance(cvss, dict):
        raise FeedError(line_number, "missing cvss object")
    score = cvss.get("score")
    if not isinstance(score, (int, float)) or isinstance(score, bool):
        raise FeedError(line_number, "cvss.score must be a number")
    score = float(score)
    if not 0.0 <= score <= 10.0:
        raise FeedError(line_number, f"cvss.score {score} outside [0,10]")
    vector = cvss.get("vector", "")
    if not isinstance(vector, str):
        raise FeedError(line_number, "cvss.vector must be a string")
    raw_affects = data.get("affects")
    if not isinstance(raw_affects, list) or not raw_affects:
        raise FeedError(line_number, "affects must be a non-empty list")
    affects = []
    for entry in raw_affects:
        if not isinstance(entry, dict):
            raise FeedError(line_number, "affects entries must be objects")
        name = entry.get("name")
        if not isinstance(name, str) or not name.strip():
            raise FeedError(line_number, "affects entry missing package name")
        introduced = entry.get("introduced")
        fixed = entry.get("fixed")
        for label, bound in (("introduced", introduced), ("fixed", fixed)):
            if bound is not None and (not isinstance(bound, str) or not bound.strip()):
                raise FeedError(line_number, f"{label} bound must be a non-empty string")
        affects.append(
            AffectedPackage(
                name=normalize_package_name(name),
                ranges=(VersionRange(introduced=introduced, fixed=fixed),),
            )
        )
    # One package may appear in several lines' worth of entries; merge ranges.
    merged: dict[str, list[VersionRange]] = {}
    for pkg in affects:
        merged.setdefault(pkg.name, []).extend(pkg.ranges)
    return Advisory(
        cve_id=cve,
        summary=str(data.get("summary", "")),
        cvss_score=score,
        cvss_vector=vector,
        severity=severity_for_score(score),
        affects=tuple(
            AffectedPackage(name=name, ranges=tuple(ranges))
            for name, ranges in sorted(merged.items())
        ),
    )


class VulnerabilityStore:
    """In-memory advisory index keyed by CVE id; re-ingest replaces in place."""

    def __init__(self) -> None:
        self._advisories: dict[str, Advisory] = {}

    def __len__(self) -> int:
        return len(self._advisories)

    def __contains__(self, cve_id: str) -> bool:
        return cve_id in self._advisories

    def get(self, cve_id: str) -> Optional[Advisory]:
        return self._advisories.get(cve_id)

    def advisories(self) -> list[Advisory]:
        return [self._advisories[k] for k in sorted(self._advisories)]

    def ingest_lines(self, lines: Iterable[str]) -> int:
        """Parse and index advisories; returns how many records were read."""
        count = 0
        for i, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FeedError(i, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(data, dict):
                raise FeedError(i, "record must be a JSON object")
            advisory = _parse_record(i, data)
            self._advisories[advisory.cve_id] = advisory
            count += 1
        return count

    def load_feed(self, path: Union[str, Path]) -> int:
        with open(path, "r", encoding="utf-8") as fh:
            return self.ingest_lines(fh)

    def findings_for(self, name: str, version: str) -> list[Advisory]:
        """All advisories affecting the package at that version, by CVE id."""
        return [
            adv for adv in self.advisories() if adv.matches(name, version)
        ]

    def findings_for_inventory(
        self, packages: Iterable[tuple[str, str]]
    ) -> dict[str, list[Advisory]]:
        """Batch lookup: {"name@version": [advisories]} over unique pairs."""
        out: dict[str, list[Advisory]] = {}
        for name, version in packages:
            key = f"{normalize_package_name(name)}@{version}"
            if key not in out:
                out[key] = self.findings_for(name, version)
        return out
