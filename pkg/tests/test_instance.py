"""Twin instance: representation history, access policy, service routes."""

import copy
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinaudit.bom import BomKind
from twinaudit.forge import build_graph, build_sbom, build_cbom, link_to_profile
from twinaudit.instance import (
    AccessPolicy,
    InstanceService,
    RepresentationError,
    Scope,
    StoredRepresentation,
    UnknownThing,
    VersionConflict,
    build_representation,
    thing_states_from_boms,
)
from twinaudit.jsonhttp import ApiRequest, HttpError

from .test_forge import algo_record, certificate_record, software_record


def host_boms(host="web-01"):
    sbom = build_sbom(
        host,
        [
            software_record(host, "flask", "2.0.1", "dependency", "requirements.txt"),
            software_record(host, "jinja2", "2.11.2", "dependency", "requirements.txt"),
        ],
    )
    records = [algo_record(host, "AES-256", "AES"), certificate_record(host)]
    cbom = build_cbom(host, build_graph(records), records)
    return [sbom, cbom]


def linked_set(host="web-01", profile="profile-a"):
    return link_to_profile(host_boms(host), profile)


class TestThingStates:
    def test_single_host_set_yields_host_and_manifest_things(self):
        states = thing_states_from_boms(linked_set())
        assert set(states) == {"web-01", "profile-a"}
        assert states["web-01"]["id"] == "web-01"
        assert states["profile-a"]["properties"]["documents"]

    def test_every_component_reachable_exactly_once(self):
        boms = linked_set()
        states = thing_states_from_boms(boms)
        found = []
        for state in states.values():
            for key, entries in state["properties"].items():
                if key == "documents":
                    continue
                if isinstance(entries, list):
                    found.extend(
                        (e["name"], e.get("version", "")) for e in entries if "name" in e
                    )
        expected = [(c.name, c.version) for b in boms for c in b.components]
        assert sorted(found) == sorted(expected)

    def test_certificate_property_count(self):
        states = thing_states_from_boms(host_boms())
        assert len(states["web-01"]["properties"]["certificates"]) == 1

    def test_links_rendered(self):
        states = thing_states_from_boms(linked_set())
        assert all(link.startswith("urn:cdx:") for link in states["web-01"]["links"])
        assert states["web-01"]["links"]

    def test_duplicate_host_document_rejected(self):
        sbom = host_boms()[0]
        with pytest.raises(RepresentationError):
            thing_states_from_boms([sbom, sbom])

    def test_empty_rejected(self):
        with pytest.raises(RepresentationError):
            build_representation([])

    def test_vulnerability_projection(self):
        import json as _json

        from twinaudit.forge import enrich_with_vulnerabilities
        from twinaudit.vulnstore import VulnerabilityStore

        store = VulnerabilityStore()
        store.ingest_lines(
            [
                _json.dumps(
                    {
                        "cve": "CVE-2023-30861",
                        "summary": "cookie issue",
                        "cvss": {"score": 7.5, "vector": "V"},
                        "affects": [{"name": "flask", "introduced": "0", "fixed": "2.3.3"}],
                    }
                )
            ]
        )
        sbom = enrich_with_vulnerabilities(host_boms()[0], store)
        states = thing_states_from_boms([sbom])
        vulns = states["web-01"]["properties"]["vulnerabilities"]
        assert [v["cve"] for v in vulns] == ["CVE-2023-30861"]


class FakeClock:
    def __init__(self):
        self.now = 100.0

    def tick(self, step=1.0):
        self.now += step
        return self.now

    def __call__(self):
        return self.now


def simple_states(marker: int) -> dict:
    return {
        "host-a": {"id": "host-a", "title": "a", "properties": {"n": marker}, "links": []},
        "host-b": {"id": "host-b", "title": "b", "properties": {"n": 0}, "links": []},
    }


class TestStoredRepresentation:
    def test_build_initializes_revision_one(self):
        rep = StoredRepresentation.build(simple_states(1))
        assert rep.current_version == 1
        assert rep.thing_ids() == ["host-a", "host-b"]
        assert rep.history("host-a") [0][0] == 1

    def test_update_appends_only_changed_things(self):
        rep = StoredRepresentation.build(simple_states(1))
        revised = rep.apply_update(simple_states(2), 2)
        assert revised == 1
        assert len(rep.history("host-a")) == 2
        assert len(rep.history("host-b")) == 1
        assert rep.current_version == 2

    def test_identical_update_appends_nothing(self):
        rep = StoredRepresentation.build(simple_states(1))
        assert rep.apply_update(simple_states(1), 2) == 0
        assert rep.current_version == 2
        assert len(rep.history("host-a")) == 1

    def test_version_gap_rejected(self):
        rep = StoredRepresentation.build(simple_states(1))
        with pytest.raises(VersionConflict):
            rep.apply_update(simple_states(2), 3)
        assert rep.current_version == 1

    def test_unknown_thing_rejected_atomically(self):
        rep = StoredRepresentation.build(simple_states(1))
        bad = simple_states(2)
        bad["host-z"] = {"id": "host-z", "title": "z", "properties": {}, "links": []}
        with pytest.raises(UnknownThing):
            rep.apply_update(bad, 2)
        # nothing applied, not even the known things
        assert rep.current_version == 1
        assert len(rep.history("host-a")) == 1
        assert rep.latest("host-a")["properties"]["n"] == 1

    def test_old_revisions_stay_readable(self):
        rep = StoredRepresentation.build(simple_states(1))
        rep.apply_update(simple_states(2), 2)
        rep.apply_update(simple_states(3), 3)
        assert rep.at_revision("host-a", 1)["properties"]["n"] == 1
        assert rep.at_revision("host-a", 2)["properties"]["n"] == 2
        assert rep.at_revision("host-a", 3)["properties"]["n"] == 3
        with pytest.raises(UnknownThing):
            rep.at_revision("host-a", 4)

    def test_timestamp_query(self):
        clock = FakeClock()
        rep = StoredRepresentation.build(simple_states(1), clock=clock)
        clock.tick(10)
        rep.apply_update(simple_states(2), 2)
        assert rep.at_time("host-a", 100.0)["properties"]["n"] == 1
        assert rep.at_time("host-a", 105.0)["properties"]["n"] == 1
        assert rep.at_time("host-a", 110.0)["properties"]["n"] == 2
        with pytest.raises(UnknownThing):
            rep.at_time("host-a", 99.9)

    def test_caller_mutation_cannot_corrupt_history(self):
        states = simple_states(1)
        rep = StoredRepresentation.build(states)
        states["host-a"]["properties"]["n"] = 999
        assert rep.latest("host-a")["properties"]["n"] == 1
        read = rep.latest("host-a")
        read["properties"]["n"] = 888
        assert rep.latest("host-a")["properties"]["n"] == 1

    @settings(max_examples=120, deadline=None)
    @given(
        st.lists(
            st.dictionaries(
                st.sampled_from(["host-a", "host-b"]),
                st.integers(min_value=0, max_value=5),
                max_size=2,
            ),
            max_size=12,
        )
    )
    def test_history_immutability_property(self, updates):
        """Snapshots already read never change under further updates."""
        rep = StoredRepresentation.build(simple_states(0))
        frozen: dict[tuple[str, int], dict] = {}
        version = 1
        for update in updates:
            states = {
                tid: {"id": tid, "title": tid[-1], "properties": {"n": n}, "links": []}
                for tid, n in update.items()
            }
            version += 1
            rep.apply_update(states, version)
            for tid in rep.thing_ids():
                for revision, _ in rep.history(tid):
                    snap = rep.at_revision(tid, revision)
                    key = (tid, revision)
                    if key in frozen:
                        assert snap == frozen[key]
                    else:
                        frozen[key] = copy.deepcopy(snap)
        for tid in rep.thing_ids():
            revisions = [r for r, _ in rep.history(tid)]
            assert revisions == list(range(1, len(revisions) + 1))


def make_service(states=None, tokens=None):
    policy = AccessPolicy(
        tokens
        if tokens is not None
        else {
            "tok-read": (Scope.READ,),
            "tok-write": (Scope.WRITE_REPRESENTATION,),
            "tok-admin": (Scope.ADMIN,),
        }
    )
    service = InstanceService("a" * 32, policy)
    if states is not None:
        put(service, "tok-write", {"version": 1, "things": states})
    return service


def call(service, method, path, token=None, query=None, body=None):
    headers = {"Authorization": f"Bearer {token}"} if token else {}
    try:
        return service.dispatch(
            ApiRequest(method=method, path=path, query=query or {}, headers=headers, body=body)
        )
    except HttpError as err:
        return err.status, err.body()


def put(service, token, body):
    return call(service, "PUT", "/representation", token=token, body=body)


class TestInstanceService:
    def test_health_unauthenticated(self):
        status, payload = call(make_service(), "GET", "/health")
        assert status == 200
        assert payload["status"] == "ok"

    def test_default_deny_unknown_token(self):
        service = make_service(simple_states(1))
        status, payload = call(service, "GET", "/things", token="nope")
        assert (status, payload["code"]) == (401, "unauthorized")
        status, payload = call(service, "GET", "/things")
        assert status == 401

    def test_scope_enforcement(self):
        service = make_service(simple_states(1))
        assert call(service, "GET", "/things", token="tok-read")[0] == 200
        # READ token cannot write
        status, payload = put(service, "tok-read", {"version": 2, "things": {}})
        assert (status, payload["code"]) == (403, "forbidden")
        # WRITE token cannot read things
        assert call(service, "GET", "/things", token="tok-write")[0] == 403
        # ADMIN export needs ADMIN
        assert call(service, "GET", "/representation", token="tok-read")[0] == 403
        assert call(service, "GET", "/representation", token="tok-admin")[0] == 200

    def test_every_route_passes_through_authorize(self):
        service = make_service(simple_states(1))
        before = len(service.policy.decisions)
        routes = [
            ("GET", "/things", None),
            ("GET", "/things/host-a", None),
            ("GET", "/things/host-a/history", None),
            ("GET", "/representation", None),
            ("PUT", "/representation", {"version": 2, "things": {}}),
        ]
        for method, path, body in routes:
            call(service, method, path, token="tok-read", body=body)
        assert len(service.policy.decisions) == before + len(routes)

    def test_thing_query_revisions(self):
        service = make_service(simple_states(1))
        put(service, "tok-write", {"version": 2, "things": simple_states(2)})
        status, latest = call(service, "GET", "/things/host-a", token="tok-read")
        assert (status, latest["properties"]["n"]) == (200, 2)
        status, old = call(
            service, "GET", "/things/host-a", token="tok-read", query={"rev": "1"}
        )
        assert (status, old["properties"]["n"]) == (200, 1)
        assert call(service, "GET", "/things/host-a", token="tok-read", query={"rev": "9"})[0] == 404
        assert call(service, "GET", "/things/nope", token="tok-read")[0] == 404
        assert (
            call(service, "GET", "/things/host-a", token="tok-read", query={"rev": "x"})[0] == 400
        )

    def test_history_route(self):
        service = make_service(simple_states(1))
        put(service, "tok-write", {"version": 2, "things": simple_states(2)})
        status, payload = call(service, "GET", "/things/host-a/history", token="tok-read")
        assert status == 200
        assert [r["revision"] for r in payload["revisions"]] == [1, 2]

    def test_put_version_conflicts(self):
        service = make_service()
        # first push must be version 1
        status, payload = put(service, "tok-write", {"version": 3, "things": simple_states(1)})
        assert (status, payload["code"]) == (409, "version_conflict")
        assert put(service, "tok-write", {"version": 1, "things": simple_states(1)})[0] == 200
        status, payload = put(service, "tok-write", {"version": 5, "things": simple_states(2)})
        assert (status, payload["code"]) == (409, "version_conflict")

    def test_put_unknown_thing(self):
        service = make_service(simple_states(1))
        bad = {"host-z": {"id": "host-z", "title": "z", "properties": {}, "links": []}}
        status, payload = put(service, "tok-write", {"version": 2, "things": bad})
        assert (status, payload["code"]) == (400, "unknown_thing")

    def test_things_before_representation(self):
        service = make_service()
        status, payload = call(service, "GET", "/things", token="tok-read")
        assert (status, payload["code"]) == (404, "no_representation")

    def test_wot_shape(self):
        states = thing_states_from_boms(linked_set())
        service = make_service(states)
        _, thing = call(service, "GET", "/things/web-01", token="tok-read")
        assert set(thing) == {"id", "title", "properties", "links"}


class TestAccessPolicy:
    def test_totality_over_arbitrary_tokens(self):
        policy = AccessPolicy({"t": (Scope.READ,)})
        for token, scope in itertools.product(
            [None, "", "t", "T", "zzz", "t" * 500], list(Scope)
        ):
            allowed = policy.authorize(token, scope)
            assert allowed == (token == "t" and scope == Scope.READ)

    def test_grant_requires_token(self):
        with pytest.raises(ValueError):
            AccessPolicy({"": (Scope.READ,)})
