"""Advisory store: ordering rules, range boundaries, oracle equivalence."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinaudit.bom import Severity
from twinaudit.vulnstore import (
    FeedError,
    VersionRange,
    VulnerabilityStore,
    compare_versions,
    normalize_package_name,
    parse_version,
)


def record(cve, name, introduced=None, fixed=None, score=7.5):
    entry = {"name": name}
    if introduced is not None:
        entry["introduced"] = introduced
    if fixed is not None:
        entry["fixed"] = fixed
    return json.dumps(
        {
            "cve": cve,
            "summary": f"issue in {name}",
            "cvss": {"score": score, "vector": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"},
            "affects": [entry],
        }
    )


def store_with(*lines) -> VulnerabilityStore:
    store = VulnerabilityStore()
    store.ingest_lines(lines)
    return store


class TestVersionOrder:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("1.2", "1.10", -1),
            ("1.2", "1.2.0", 0),
            ("1.2", "1.2a", -1),
            ("1.0rc1", "1.0rc2", -1),
            ("2.6.3", "2.6.10", -1),
            ("10.0", "9.9", 1),
            ("1.2.3", "1.2.3", 0),
            ("0.9", "1.0", -1),
        ],
    )
    def test_table(self, a, b, expected):
        assert compare_versions(a, b) == expected

    @given(st.lists(st.integers(0, 40), min_size=1, max_size=4))
    def test_numeric_join_round_trip(self, parts):
        text = ".".join(str(p) for p in parts)
        assert parse_version(text) == tuple((p, "") for p in parts)

    @given(
        st.lists(st.integers(0, 30), min_size=1, max_size=3),
        st.lists(st.integers(0, 30), min_size=1, max_size=3),
    )
    def test_antisymmetry(self, a, b):
        va, vb = ".".join(map(str, a)), ".".join(map(str, b))
        assert compare_versions(va, vb) == -compare_versions(vb, va)


class TestNormalization:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Flask", "flask"),
            ("python_dateutil", "python-dateutil"),
            (" jinja2 ", "jinja2"),
            ("Spring-Boot_Starter", "spring-boot-starter"),
        ],
    )
    def test_names(self, raw, expected):
        assert normalize_package_name(raw) == expected

    def test_lookup_crosses_spellings(self):
        store = store_with(record("CVE-2024-1000", "python_dateutil", "2.0", "2.9"))
        assert store.findings_for("Python-Dateutil", "2.5")


class TestRangeBoundaries:
    def test_introduced_inclusive(self):
        assert VersionRange(introduced="1.2", fixed="2.0").contains("1.2")

    def test_fixed_exclusive(self):
        rng = VersionRange(introduced="1.2", fixed="2.0")
        assert not rng.contains("2.0")
        assert rng.contains("1.9.9")

    def test_open_bounds(self):
        assert VersionRange(fixed="2.0").contains("0.1")
        assert VersionRange(introduced="1.0").contains("99.0")
        assert VersionRange().contains("3.4")

    def test_unversioned_matches_only_fully_open(self):
        assert VersionRange().contains("")
        assert not VersionRange(introduced="1.0").contains("")
        assert not VersionRange(fixed="1.0").contains("")


class TestIngest:
    def test_counts_and_lookup(self):
        store = store_with(
            record("CVE-2024-1000", "flask", "0", "2.1"),
            record("CVE-2024-1001", "flask", "2.0", "2.0.2"),
            record("CVE-2024-1002", "lodash", None, "4.17.21"),
        )
        assert len(store) == 3
        hits = [a.cve_id for a in store.findings_for("flask", "2.0.1")]
        assert hits == ["CVE-2024-1000", "CVE-2024-1001"]

    def test_reingest_is_idempotent(self):
        lines = [record("CVE-2024-1000", "flask", "0", "2.1")]
        store = VulnerabilityStore()
        store.ingest_lines(lines)
        before = store.advisories()
        store.ingest_lines(lines)
        assert store.advisories() == before
        assert len(store) == 1

    def test_same_cve_replaces(self):
        store = store_with(
            record("CVE-2024-1000", "flask", "0", "2.1", score=5.0),
            record("CVE-2024-1000", "flask", "0", "2.1", score=9.8),
        )
        assert len(store) == 1
        assert store.get("CVE-2024-1000").severity == Severity.CRITICAL

    def test_blank_lines_skipped(self):
        store = store_with("", record("CVE-2024-1000", "flask"), "   ")
        assert len(store) == 1

    @pytest.mark.parametrize(
        "line,fragment",
        [
            ("{not json", "invalid JSON"),
            ('"just a string"', "must be a JSON object"),
            (json.dumps({"cve": "NOPE", "cvss": {"score": 5}, "affects": [{"name": "x"}]}), "bad cve id"),
            (json.dumps({"cve": "CVE-2024-1000", "affects": [{"name": "x"}]}), "missing cvss"),
            (
                json.dumps({"cve": "CVE-2024-1000", "cvss": {"score": 11}, "affects": [{"name": "x"}]}),
                "outside [0,10]",
            ),
            (json.dumps({"cve": "CVE-2024-1000", "cvss": {"score": 5}, "affects": []}), "non-empty"),
            (
                json.dumps({"cve": "CVE-2024-1000", "cvss": {"score": 5}, "affects": [{"name": ""}]}),
                "missing package name",
            ),
        ],
    )
    def test_malformed_lines_report_position(self, line, fragment):
        store = VulnerabilityStore()
        with pytest.raises(FeedError) as err:
            store.ingest_lines(["", line])
        assert err.value.line_number == 2
        assert fragment in str(err.value)

    def test_severity_derived_from_score(self):
        store = store_with(record("CVE-2024-1000", "flask", score=0.0))
        assert store.get("CVE-2024-1000").severity == Severity.NONE


versions_st = st.lists(st.integers(0, 9), min_size=1, max_size=3).map(
    lambda parts: ".".join(map(str, parts))
)


@st.composite
def feeds(draw):
    names = draw(st.lists(st.sampled_from(["liba", "libb", "libc"]), min_size=1, max_size=6))
    lines = []
    for i, name in enumerate(names):
        bounds = sorted(
            [draw(versions_st), draw(versions_st)], key=lambda v: parse_version(v)
        )
        introduced = draw(st.one_of(st.none(), st.just(bounds[0])))
        fixed = draw(st.one_of(st.none(), st.just(bounds[1])))
        lines.append(record(f"CVE-2024-{1000 + i}", name, introduced, fixed))
    return lines


class TestOracleEquivalence:
    @settings(max_examples=120, deadline=None)
    @given(feeds(), st.sampled_from(["liba", "libb", "libc"]), versions_st)
    def test_matches_linear_scan(self, lines, name, version):
        store = VulnerabilityStore()
        store.ingest_lines(lines)

        expected = []
        for raw in lines:
            data = json.loads(raw)
            for entry in data["affects"]:
                if entry["name"] != name:
                    continue
                intro, fixed = entry.get("introduced"), entry.get("fixed")
                if intro is not None and compare_versions(version, intro) < 0:
                    continue
                if fixed is not None and compare_versions(version, fixed) >= 0:
                    continue
                expected.append(data["cve"])
                break
        # Later lines replace earlier ones for the same CVE; ids here are unique.
        assert [a.cve_id for a in store.findings_for(name, version)] == sorted(set(expected))
