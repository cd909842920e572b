"""Canonical serialization: golden output, round trips, strict/lenient parse."""

import json
import random

import pytest
from hypothesis import given, settings

from twinaudit.bom import (
    Bom,
    BomKind,
    BomMetadata,
    BomParseError,
    BomSchemaError,
    BomValidationError,
    SubjectKind,
    parse_bom,
    serialize_bom,
)

from .strategies import boms

SERIAL = "urn:uuid:0b7a60e8-1d44-4c1c-9a3e-2f6d0c4a9b10"

# Frozen by hand: the one canonical rendering of the empty document.
GOLDEN_EMPTY = (
    '{"bomFormat":"CycloneDX",'
    '"components":[],'
    '"metadata":{"component":{"name":"web-01","type":"device"},'
    '"properties":[{"name":"twinaudit:kind","value":"SBOM"}]},'
    f'"serialNumber":"{SERIAL}",'
    '"specVersion":"1.6",'
    '"version":1}'
)


def empty_bom() -> Bom:
    return Bom(
        serial_number=SERIAL,
        version=1,
        kind=BomKind.SBOM,
        metadata=BomMetadata(subject_kind=SubjectKind.HOST, subject_name="web-01"),
    )


class TestSerialize:
    def test_golden_empty_document(self):
        assert serialize_bom(empty_bom()) == GOLDEN_EMPTY

    def test_components_key_present_even_when_empty(self):
        assert '"components":[]' in serialize_bom(empty_bom())

    def test_empty_sections_omitted(self):
        text = serialize_bom(empty_bom())
        for key in ("dependencies", "vulnerabilities", "externalReferences"):
            assert key not in text

    def test_invalid_document_is_rejected_whole(self):
        bad = Bom(
            serial_number="not-a-serial",
            version=1,
            kind=BomKind.SBOM,
            metadata=BomMetadata(subject_kind=SubjectKind.HOST, subject_name="web-01"),
        )
        with pytest.raises(BomValidationError) as err:
            serialize_bom(bad)
        assert any(v.path == "serialNumber" for v in err.value.violations)

    @settings(max_examples=120, deadline=None)
    @given(boms())
    def test_round_trip_identity(self, bom):
        text = serialize_bom(bom)
        parsed = parse_bom(text)
        assert parsed == bom
        assert serialize_bom(parsed) == text

    @settings(max_examples=60, deadline=None)
    @given(boms())
    def test_input_order_does_not_matter(self, bom):
        rng = random.Random(7)
        shuffled = Bom(
            serial_number=bom.serial_number,
            version=bom.version,
            kind=bom.kind,
            metadata=bom.metadata,
            components=tuple(rng.sample(bom.components, len(bom.components))),
            dependencies=tuple(rng.sample(bom.dependencies, len(bom.dependencies))),
            vulnerabilities=tuple(
                rng.sample(bom.vulnerabilities, len(bom.vulnerabilities))
            ),
            links=tuple(rng.sample(bom.links, len(bom.links))),
        )
        assert serialize_bom(shuffled) == serialize_bom(bom)


class TestParse:
    def test_malformed_json_reports_position(self):
        with pytest.raises(BomParseError) as err:
            parse_bom('{"bomFormat": "CycloneDX",')
        assert err.value.line == 1
        assert err.value.column > 1

    def test_missing_serial_number(self):
        doc = json.loads(GOLDEN_EMPTY)
        del doc["serialNumber"]
        with pytest.raises(BomSchemaError) as err:
            parse_bom(json.dumps(doc))
        assert any(
            "missing required field serialNumber" in v.message for v in err.value.violations
        )

    @pytest.mark.parametrize(
        "field,value,expected",
        [
            ("bomFormat", "SPDX", "expected 'CycloneDX'"),
            ("specVersion", "1.4", "unsupported version"),
            ("version", "one", "expected int"),
        ],
    )
    def test_header_field_checks(self, field, value, expected):
        doc = json.loads(GOLDEN_EMPTY)
        doc[field] = value
        with pytest.raises(BomSchemaError) as err:
            parse_bom(json.dumps(doc))
        assert any(expected in v.message for v in err.value.violations)

    def test_non_object_root(self):
        with pytest.raises(BomSchemaError):
            parse_bom("[1,2,3]")

    def test_strict_rejects_unknown_top_level_field(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["x-vendor"] = {"tool": "scanner", "level": 3}
        with pytest.raises(BomSchemaError) as err:
            parse_bom(json.dumps(doc))
        assert any(v.path == "x-vendor" for v in err.value.violations)

    def test_lenient_preserves_unknown_top_level_field(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["x-vendor"] = {"tool": "scanner", "level": 3}
        bom = parse_bom(json.dumps(doc), strict=False)
        assert bom.extras == (("x-vendor", '{"level":3,"tool":"scanner"}'),)
        out = json.loads(serialize_bom(bom))
        assert out["x-vendor"] == {"tool": "scanner", "level": 3}

    def test_strict_rejects_unknown_component_field(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["components"] = [
            {"bom-ref": "a", "type": "library", "name": "liba", "licenses": []}
        ]
        with pytest.raises(BomSchemaError) as err:
            parse_bom(json.dumps(doc))
        assert any("licenses" in v.path for v in err.value.violations)

    def test_lenient_tolerates_unknown_component_field(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["components"] = [
            {"bom-ref": "a", "type": "library", "name": "liba", "licenses": []}
        ]
        bom = parse_bom(json.dumps(doc), strict=False)
        assert bom.component_by_ref("a").name == "liba"

    def test_semantic_violations_surface_at_parse(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["components"] = [{"bom-ref": "a", "type": "library", "name": "liba"}]
        doc["vulnerabilities"] = [
            {
                "id": "CVE-2024-1111",
                "ratings": [
                    {"method": "CVSSv31", "score": 9.8, "severity": "low", "vector": "V"}
                ],
                "analysis": {"state": "in_triage"},
                "affects": [{"ref": "a"}],
            }
        ]
        with pytest.raises(BomSchemaError) as err:
            parse_bom(json.dumps(doc))
        assert any("inconsistent with score" in v.message for v in err.value.violations)

    def test_missing_kind_property_rejected_in_strict(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["metadata"]["properties"] = []
        with pytest.raises(BomSchemaError) as err:
            parse_bom(json.dumps(doc))
        assert any("twinaudit:kind" in v.message for v in err.value.violations)

    def test_missing_kind_property_defaults_in_lenient(self):
        doc = json.loads(GOLDEN_EMPTY)
        doc["metadata"]["properties"] = []
        assert parse_bom(json.dumps(doc), strict=False).kind == BomKind.MIXED
