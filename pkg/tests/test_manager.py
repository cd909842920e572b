"""Lifecycle manager: HTTP contract, trace conformance, failure injection."""

import re
import threading

import pytest
import requests
from hypothesis import given, settings
from hypothesis import strategies as st

from twinaudit.bom import serialize_bom
from twinaudit.jsonhttp import HttpError, SharedJsonServer
from twinaudit.manager import (
    CREATE_STAGES,
    ID_PATTERN,
    InProcessRuntime,
    InstanceConfig,
    ManagerClient,
    ManagerService,
    RuntimeAdapter,
    SdtManager,
    TraceRecorder,
    UPDATE_STAGES,
    is_subsequence,
)

from .test_instance import linked_set


class SabotageRuntime(RuntimeAdapter):
    """Wraps a real runtime; can fail deploys or poison instance tokens."""

    def __init__(self, inner: RuntimeAdapter):
        self.inner = inner
        self.fail_deploy = False
        self.poison_tokens = False
        self.deployed: set[str] = set()

    def deploy_instance(self, config: InstanceConfig) -> str:
        if self.fail_deploy:
            raise RuntimeError("injected deploy failure")
        if self.poison_tokens:
            config = InstanceConfig(sdt_id=config.sdt_id, tokens={"decoy": ("READ",)})
        endpoint = self.inner.deploy_instance(config)
        self.deployed.add(endpoint)
        return endpoint

    def destroy_instance(self, endpoint: str) -> None:
        self.inner.destroy_instance(endpoint)
        self.deployed.discard(endpoint)

    def probe(self, endpoint: str) -> bool:
        return self.inner.probe(endpoint)


class Env:
    def __init__(self):
        self.server = SharedJsonServer().start()
        self.runtime = InProcessRuntime(self.server)
        self.counter = 0

    def make_manager(self, sabotage=False):
        runtime = SabotageRuntime(self.runtime) if sabotage else self.runtime
        manager = SdtManager(runtimes=[runtime], tracer=TraceRecorder())
        self.counter += 1
        prefix = f"/mgr{self.counter}"
        self.server.mount(prefix, ManagerService(manager))
        client = ManagerClient(self.server.url_for(prefix))
        return manager, client, runtime

    def stop(self):
        self.server.stop()


_PROP_ENV = None


def setup_module(module):
    global _PROP_ENV
    _PROP_ENV = Env()


def teardown_module(module):
    if _PROP_ENV is not None:
        _PROP_ENV.stop()


@pytest.fixture(scope="module")
def env():
    return _PROP_ENV


def bom_texts(host="web-01", profile="profile-a"):
    return [serialize_bom(b) for b in linked_set(host, profile)]


def create_payload(host="web-01"):
    return {"profileId": "profile-a", "boms": bom_texts(host)}


class TestAllocateId:
    def test_format_and_uniqueness(self, env):
        manager, _, _ = env.make_manager()
        first, second = manager.allocate_id(), manager.allocate_id()
        assert first != second
        assert re.fullmatch(ID_PATTERN, first)

    def test_million_draws_no_collision(self, env):
        manager, _, _ = env.make_manager()
        seen = set()
        pattern = re.compile(ID_PATTERN)
        for _ in range(1_000_000):
            seen.add(manager.allocate_id())
        assert len(seen) == 1_000_000
        sample = sorted(seen)[::200_000]
        assert all(pattern.fullmatch(s) for s in sample)


class TestCreate:
    def test_create_reaches_ready_and_is_queryable(self, env):
        manager, client, runtime = env.make_manager()
        descriptor = client.create("profile-a", bom_texts())
        assert descriptor["state"] == "READY"
        assert descriptor["representationVersion"] == 1
        assert re.fullmatch(ID_PATTERN, descriptor["sdtId"])
        assert runtime.probe(descriptor["endpoint"])
        # the instance serves the WoT interface with a provisioned token
        tokens = {"operator": ["READ"]}
        described = client.create("profile-a", bom_texts("db-01"), options={"tokens": tokens})
        response = requests.get(
            described["endpoint"] + "/things",
            headers={"Authorization": "Bearer operator"},
            timeout=5,
        )
        assert response.status_code == 200
        assert "db-01" in response.json()["things"]

    def test_trace_matches_create_chain(self, env):
        manager, client, _ = env.make_manager()
        client.create("profile-a", bom_texts("trace-host"))
        span = manager.tracer.last("create")
        assert is_subsequence(CREATE_STAGES, span.stages)

    def test_unparsable_bom_rejected_before_deploy(self, env):
        manager, client, runtime = env.make_manager(sabotage=True)
        live_before = set(runtime.deployed)
        with pytest.raises(Exception) as err:
            client.create("profile-a", ["{not json"])
        assert getattr(err.value, "status", None) == 400
        assert runtime.deployed == live_before
        assert manager.list_descriptors() == []

    def test_empty_boms_rejected(self, env):
        _, client, _ = env.make_manager()
        with pytest.raises(Exception) as err:
            client.create("profile-a", [])
        assert getattr(err.value, "status", None) == 400

    def test_deploy_failure_leaves_error_descriptor_and_no_instance(self, env):
        manager, client, runtime = env.make_manager(sabotage=True)
        runtime.fail_deploy = True
        with pytest.raises(Exception) as err:
            client.create("profile-a", bom_texts())
        assert getattr(err.value, "status", None) == 502
        assert getattr(err.value, "code", None) == "deploy"
        assert runtime.deployed == set()
        (descriptor,) = manager.list_descriptors()
        assert (descriptor["state"], descriptor["error"]) == ("ERROR", "deploy")

    def test_representation_failure_tears_instance_down(self, env):
        manager, client, runtime = env.make_manager(sabotage=True)
        runtime.poison_tokens = True
        with pytest.raises(Exception) as err:
            client.create("profile-a", bom_texts())
        assert getattr(err.value, "code", None) == "representation"
        assert runtime.deployed == set()  # no orphans
        (descriptor,) = manager.list_descriptors()
        assert (descriptor["state"], descriptor["error"]) == ("ERROR", "representation")
        assert descriptor["endpoint"] is None


class TestUpdate:
    def test_empty_update_bumps_version_only(self, env):
        manager, client, runtime = env.make_manager()
        created = client.create("profile-a", bom_texts("upd-host"))
        sdt_id = created["sdtId"]
        result = client.update(sdt_id, expected_version=1)
        assert result["representationVersion"] == 2
        service = runtime.instance_service(created["endpoint"])
        rep = service.representation()
        assert rep.current_version == 2
        assert all(len(rep.history(t)) == 1 for t in rep.thing_ids())
        span = manager.tracer.last("update")
        assert is_subsequence(UPDATE_STAGES, span.stages)

    def test_stale_version_conflicts_without_change(self, env):
        manager, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("stale-host"))
        sdt_id = created["sdtId"]
        client.update(sdt_id, expected_version=1)
        with pytest.raises(Exception) as err:
            client.update(sdt_id, expected_version=1)
        assert getattr(err.value, "status", None) == 409
        assert getattr(err.value, "code", None) == "version_conflict"
        assert client.get(sdt_id)["representationVersion"] == 2
        assert client.get(sdt_id)["state"] == "READY"

    def test_missing_version_precondition(self, env):
        _, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("nover-host"))
        with pytest.raises(Exception) as err:
            client.update(created["sdtId"], expected_version=None)
        assert getattr(err.value, "status", None) == 400

    def test_unknown_id(self, env):
        _, client, _ = env.make_manager()
        with pytest.raises(Exception) as err:
            client.update("f" * 32, expected_version=1)
        assert getattr(err.value, "status", None) == 404

    def test_replacement_document_updates_things(self, env):
        from twinaudit.forge import build_sbom
        from .test_forge import software_record

        _, client, runtime = env.make_manager()
        created = client.create("profile-a", bom_texts("repl-host"))
        new_sbom = build_sbom(
            "repl-host",
            [software_record("repl-host", "flask", "3.0.0", "dependency", "requirements.txt")],
            version=2,
        )
        client.update(created["sdtId"], expected_version=1, bom_texts=[serialize_bom(new_sbom)])
        service = runtime.instance_service(created["endpoint"])
        state = service.representation().latest("repl-host")
        versions = [e["version"] for e in state["properties"]["software"]]
        assert versions == ["3.0.0"]
        assert len(service.representation().history("repl-host")) == 2


class TestDestroy:
    def test_destroy_is_terminal_and_idempotent(self, env):
        manager, client, runtime = env.make_manager()
        created = client.create("profile-a", bom_texts("gone-host"))
        sdt_id, endpoint = created["sdtId"], created["endpoint"]
        assert runtime.probe(endpoint)
        client.destroy(sdt_id)
        assert not runtime.probe(endpoint)
        assert client.get(sdt_id)["state"] == "DESTROYED"
        client.destroy(sdt_id)  # second call: no-op success
        assert client.get(sdt_id)["state"] == "DESTROYED"

    def test_update_after_destroy_rejected(self, env):
        _, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("dead-host"))
        client.destroy(created["sdtId"])
        with pytest.raises(Exception) as err:
            client.update(created["sdtId"], expected_version=1)
        assert getattr(err.value, "status", None) in (404, 409)

    def test_destroy_unknown(self, env):
        _, client, _ = env.make_manager()
        with pytest.raises(Exception) as err:
            client.destroy("0" * 32)
        assert getattr(err.value, "status", None) == 404


class TestHttpContract:
    """Status codes and JSON shapes over the wire, per endpoint."""

    def test_post_sdts_201_shape(self, env):
        _, client, _ = env.make_manager()
        url = client.base_url + "/sdts"
        response = requests.post(url, json=create_payload("wire-host"), timeout=10)
        assert response.status_code == 201
        body = response.json()
        assert {"sdtId", "state", "endpoint"} <= set(body)
        assert body["state"] == "READY"

    def test_put_sdts_200_and_409(self, env):
        _, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("wire2-host"))
        url = f"{client.base_url}/sdts/{created['sdtId']}"
        ok = requests.put(url, json={"expectedVersion": 1}, timeout=10)
        assert ok.status_code == 200
        assert set(ok.json()) == {"sdtId", "representationVersion"}
        stale = requests.put(url, json={"expectedVersion": 1}, timeout=10)
        assert stale.status_code == 409
        assert {"code", "message"} <= set(stale.json())

    def test_delete_204_and_404(self, env):
        _, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("wire3-host"))
        response = requests.delete(f"{client.base_url}/sdts/{created['sdtId']}", timeout=10)
        assert response.status_code == 204
        assert response.content == b""
        missing = requests.delete(f"{client.base_url}/sdts/{'9' * 32}", timeout=10)
        assert missing.status_code == 404
        assert missing.json()["code"] == "not_found"

    def test_get_list_and_one(self, env):
        _, client, _ = env.make_manager()
        empty = requests.get(client.base_url + "/sdts", timeout=10)
        assert empty.status_code == 200 and empty.json() == {"sdts": []}
        created = client.create("profile-a", bom_texts("wire4-host"))
        listing = requests.get(client.base_url + "/sdts", timeout=10)
        assert [d["sdtId"] for d in listing.json()["sdts"]] == [created["sdtId"]]
        one = requests.get(f"{client.base_url}/sdts/{created['sdtId']}", timeout=10)
        assert one.status_code == 200
        expected_fields = {
            "sdtId",
            "state",
            "profileId",
            "createdAt",
            "updatedAt",
            "endpoint",
            "representationVersion",
        }
        assert expected_fields <= set(one.json())
        missing = requests.get(f"{client.base_url}/sdts/{'8' * 32}", timeout=10)
        assert missing.status_code == 404

    def test_instance_endpoints_over_the_wire(self, env):
        _, client, _ = env.make_manager()
        created = client.create(
            "profile-a", bom_texts("wire5-host"), options={"tokens": {"reader": ["READ"]}}
        )
        endpoint = created["endpoint"]
        auth = {"Authorization": "Bearer reader"}
        health = requests.get(endpoint + "/health", timeout=10)
        assert health.status_code == 200
        things = requests.get(endpoint + "/things", headers=auth, timeout=10)
        assert things.status_code == 200
        thing_id = "wire5-host"
        one = requests.get(f"{endpoint}/things/{thing_id}", headers=auth, timeout=10)
        assert one.status_code == 200
        assert set(one.json()) == {"id", "title", "properties", "links"}
        history = requests.get(f"{endpoint}/things/{thing_id}/history", headers=auth, timeout=10)
        assert history.status_code == 200
        denied = requests.get(endpoint + "/things", timeout=10)
        assert denied.status_code == 401
        wrong = requests.get(
            endpoint + "/things", headers={"Authorization": "Bearer fake"}, timeout=10
        )
        assert wrong.status_code == 401
        no_scope = requests.get(endpoint + "/representation", headers=auth, timeout=10)
        assert no_scope.status_code == 403
        gone = requests.get(f"{endpoint}/things/ghost", headers=auth, timeout=10)
        assert gone.status_code == 404

    def test_footprint_route(self, env):
        _, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("wire6-host"))
        footprint = client.footprint(created["sdtId"])
        assert footprint > 0
        client.destroy(created["sdtId"])
        with pytest.raises(Exception) as err:
            client.footprint(created["sdtId"])
        assert getattr(err.value, "status", None) == 409


class TestListOrdering:
    def test_list_sorted_by_creation(self, env):
        manager, client, _ = env.make_manager()
        ids = [client.create("profile-a", bom_texts(f"order-{i}"))["sdtId"] for i in range(3)]
        listed = [d["sdtId"] for d in manager.list_descriptors()]
        assert listed == ids


OPS = st.sampled_from(
    ["create", "create_fail_deploy", "create_fail_push", "update", "update_stale", "destroy"]
)


class TestLifecycleProperties:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(OPS, min_size=1, max_size=8), st.randoms(use_true_random=False))
    def test_no_orphans_and_gapfree_versions(self, ops, rng):
        """Random op interleavings with failure injection keep the registry
        and the runtime consistent; versions per id count 1..n without gaps."""
        runtime = SabotageRuntime(_PROP_ENV.runtime)
        manager = SdtManager(runtimes=[runtime])
        ids: list[str] = []
        versions: dict[str, int] = {}

        for op in ops:
            target = rng.choice(ids) if ids else None
            try:
                if op == "create":
                    descriptor = manager.handle_create(create_payload(f"h{len(ids)}"))
                    ids.append(descriptor["sdtId"])
                    versions[descriptor["sdtId"]] = 1
                elif op == "create_fail_deploy":
                    runtime.fail_deploy = True
                    try:
                        manager.handle_create(create_payload("hx"))
                    except HttpError:
                        pass
                    runtime.fail_deploy = False
                elif op == "create_fail_push":
                    runtime.poison_tokens = True
                    try:
                        manager.handle_create(create_payload("hy"))
                    except HttpError:
                        pass
                    runtime.poison_tokens = False
                elif op == "update" and target:
                    expected = versions.get(target, 1)
                    result = manager.handle_update(target, {"expectedVersion": expected})
                    assert result["representationVersion"] == expected + 1
                    versions[target] = expected + 1
                elif op == "update_stale" and target:
                    try:
                        manager.handle_update(target, {"expectedVersion": 999})
                    except HttpError as err:
                        assert err.status in (409,)
                elif op == "destroy" and target:
                    manager.handle_destroy(target)
                    versions.pop(target, None)
            except HttpError as err:
                # updates/destroys against destroyed ids are rejected cleanly
                assert err.status in (404, 409)

            live = set(runtime.deployed)
            expected_live = {
                d["endpoint"]
                for d in manager.list_descriptors()
                if d["state"] in ("READY", "UPDATING") and d["endpoint"]
            }
            assert live == expected_live

        # cleanup so the shared server does not accumulate mounts
        for descriptor in manager.list_descriptors():
            try:
                manager.handle_destroy(descriptor["sdtId"])
            except HttpError:
                pass
        assert runtime.deployed == set()

    def test_concurrent_updates_serialize(self, env):
        manager, client, _ = env.make_manager()
        created = client.create("profile-a", bom_texts("conc-host"))
        sdt_id = created["sdtId"]
        successes: list[int] = []
        lock = threading.Lock()

        def worker():
            for _ in range(6):
                current = client.get(sdt_id)["representationVersion"]
                try:
                    result = client.update(sdt_id, expected_version=current)
                except Exception:
                    continue
                with lock:
                    successes.append(result["representationVersion"])

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        final = client.get(sdt_id)["representationVersion"]
        assert sorted(successes) == list(range(2, final + 1))
