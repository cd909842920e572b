"""End-to-end command line flows, embedded and external manager modes."""

import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from twinaudit.cli import main
from twinaudit.fixtures.generator import generate
from twinaudit.jsonhttp import SharedJsonServer
from twinaudit.manager import InProcessRuntime, ManagerService, SdtManager

_ENV = None


class Env:
    def __init__(self):
        self.server = SharedJsonServer().start()
        manager = SdtManager(runtimes=[InProcessRuntime(self.server)])
        self.manager_url = self.server.mount("/cli-mgr", ManagerService(manager))

    def stop(self):
        self.server.stop()


def setup_module(module):
    global _ENV
    _ENV = Env()


def teardown_module(module):
    if _ENV is not None:
        _ENV.stop()


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def minimal_fx(tmp_path_factory):
    return generate("minimal", 5, tmp_path_factory.mktemp("cli-minimal"))


@pytest.fixture()
def store_env(tmp_path):
    return {"TWINAUDIT_STORE": str(tmp_path / "store")}


def ok(result):
    assert result.exit_code == 0, result.output
    return result


def prepared_store(runner, env, fx):
    ok(runner.invoke(main, ["inventory", "ingest", fx["inventory"]], env=env))
    ok(runner.invoke(main, ["profile", "create", "-f", fx["profile"]], env=env))


def run_audit(runner, env, fx):
    prepared_store(runner, env, fx)
    result = ok(
        runner.invoke(
            main,
            ["audit", "run", fx["profile_id"], "--feed", fx["feed"], "--json"],
            env=env,
        )
    )
    return json.loads(result.output)


class TestFixtureCommand:
    def test_generate_writes_manifest_and_files(self, runner, tmp_path):
        out = tmp_path / "fx"
        result = ok(
            runner.invoke(
                main,
                ["fixture", "generate", "--spec", "minimal", "--seed", "9", "--out", str(out)],
            )
        )
        manifest = json.loads(result.output)
        assert manifest["spec"] == "minimal"
        assert Path(manifest["inventory"]).is_file()
        assert Path(manifest["profile"]).is_file()
        assert Path(manifest["feed"]).is_file()
        for ref in manifest["snapshots"].values():
            assert Path(ref).is_dir()

    def test_unknown_spec_rejected(self, runner, tmp_path):
        result = runner.invoke(
            main, ["fixture", "generate", "--spec", "mainframe", "--out", str(tmp_path)]
        )
        assert result.exit_code != 0


class TestIngestAndProfile:
    def test_ingest_reports_sizes(self, runner, store_env, minimal_fx):
        result = ok(
            runner.invoke(
                main, ["inventory", "ingest", minimal_fx["inventory"]], env=store_env
            )
        )
        assert "1 hosts" in result.output

    def test_profile_reports_selection(self, runner, store_env, minimal_fx):
        ok(runner.invoke(main, ["inventory", "ingest", minimal_fx["inventory"]], env=store_env))
        result = ok(
            runner.invoke(
                main, ["profile", "create", "-f", minimal_fx["profile"]], env=store_env
            )
        )
        assert "selects 1 hosts" in result.output

    def test_profile_with_unmatched_selector_fails(self, runner, store_env, minimal_fx):
        result = runner.invoke(
            main, ["profile", "create", "-f", minimal_fx["profile"]], env=store_env
        )
        assert result.exit_code == 1
        assert "solo-01" in result.output

    def test_missing_inventory_file_fails(self, runner, store_env):
        result = runner.invoke(
            main, ["inventory", "ingest", "/nonexistent/inventory.json"], env=store_env
        )
        assert result.exit_code != 0


class TestAuditFlow:
    def test_run_reaches_ready_and_is_reportable(self, runner, store_env, minimal_fx):
        run = run_audit(runner, store_env, minimal_fx)
        assert run["state"] == "SDT_READY"
        assert run["hosts"] == ["solo-01"]
        assert len(run["bom_serials"]) == 3

        status = ok(
            runner.invoke(main, ["audit", "status", run["run_id"]], env=store_env)
        )
        assert "state: SDT_READY" in status.output

        report = ok(
            runner.invoke(main, ["audit", "report", run["run_id"]], env=store_env)
        )
        assert "| solo-01 |" in report.output
        assert "CVE-2023-29001" in report.output

        counts = json.loads(
            ok(
                runner.invoke(
                    main, ["audit", "report", run["run_id"], "--json"], env=store_env
                )
            ).output
        )
        assert counts["total"] == {
            "algorithms": 2,
            "vulnerabilities": 1,
            "components": 2,
            "certificates": 0,
        }

    def test_unknown_profile_fails(self, runner, store_env):
        result = runner.invoke(main, ["audit", "run", "ghost"], env=store_env)
        assert result.exit_code == 1
        assert "ghost" in result.output

    def test_unknown_run_ids_fail(self, runner, store_env):
        for command in ("status", "report"):
            result = runner.invoke(main, ["audit", command, "nope"], env=store_env)
            assert result.exit_code == 1, command

    def test_update_without_changes_succeeds_embedded(
        self, runner, store_env, minimal_fx
    ):
        run = run_audit(runner, store_env, minimal_fx)
        result = ok(
            runner.invoke(
                main,
                [
                    "audit", "update", run["run_id"],
                    "--feed", minimal_fx["feed"], "--json",
                ],
                env=store_env,
            )
        )
        updated = json.loads(result.output)
        assert updated["state"] == "SDT_READY"
        assert updated["representation_version"] == 1

    def test_config_file_supplies_store_and_feed(self, runner, tmp_path, minimal_fx):
        config_path = tmp_path / "settings.yaml"
        config_path.write_text(
            yaml.safe_dump(
                {"store_path": str(tmp_path / "store"), "feed_path": minimal_fx["feed"]}
            )
        )
        base = ["--config", str(config_path)]
        ok(runner.invoke(main, base + ["inventory", "ingest", minimal_fx["inventory"]]))
        ok(runner.invoke(main, base + ["profile", "create", "-f", minimal_fx["profile"]]))
        run = json.loads(
            ok(
                runner.invoke(
                    main, base + ["audit", "run", minimal_fx["profile_id"], "--json"]
                )
            ).output
        )
        counts = json.loads(
            ok(
                runner.invoke(
                    main, base + ["audit", "report", run["run_id"], "--json"]
                )
            ).output
        )
        assert counts["total"]["vulnerabilities"] == 1  # feed came from config


class TestExternalManager:
    @pytest.fixture()
    def ext_env(self, tmp_path, tmp_path_factory):
        fx = generate("minimal", 11, tmp_path_factory.mktemp("cli-ext"))
        env = {
            "TWINAUDIT_STORE": str(tmp_path / "store"),
            "TWINAUDIT_MANAGER_URL": _ENV.manager_url,
            "TWINAUDIT_FEED": fx["feed"],
        }
        return env, fx

    def _touch_snapshot(self, fx):
        path = Path(fx["snapshots"]["solo-01"]) / "opt" / "app" / "requirements.txt"
        text = path.read_text().replace("miniweb==0.3.2", "miniweb==0.4.0")
        path.write_text(text)

    def test_twin_survives_across_invocations(self, runner, ext_env):
        env, fx = ext_env
        prepared_store(runner, env, fx)
        run = json.loads(
            ok(
                runner.invoke(
                    main, ["audit", "run", fx["profile_id"], "--json"], env=env
                )
            ).output
        )
        sdt_id = run["sdt_id"]

        listing = ok(runner.invoke(main, ["sdt", "list"], env=env))
        assert sdt_id in listing.output and "READY" in listing.output

        shown = json.loads(ok(runner.invoke(main, ["sdt", "get", sdt_id], env=env)).output)
        assert shown["representationVersion"] == 1

        footprint = ok(runner.invoke(main, ["sdt", "footprint", sdt_id], env=env))
        assert footprint.output.strip().endswith("bytes")
        assert int(footprint.output.split()[0]) > 0

        self._touch_snapshot(fx)
        updated = json.loads(
            ok(
                runner.invoke(
                    main, ["audit", "update", run["run_id"], "--hosts", "solo-01", "--json"],
                    env=env,
                )
            ).output
        )
        assert updated["representation_version"] == 2

        destroyed = ok(runner.invoke(main, ["sdt", "destroy", sdt_id], env=env))
        assert sdt_id in destroyed.output

        path = Path(fx["snapshots"]["solo-01"]) / "opt" / "app" / "requirements.txt"
        path.write_text(path.read_text().replace("miniweb==0.4.0", "miniweb==0.5.0"))
        rejected = runner.invoke(
            main, ["audit", "update", run["run_id"], "--json"], env=env
        )
        assert rejected.exit_code == 1
        assert "update_rejected" in rejected.output

    def test_unknown_sdt_id_fails(self, runner, ext_env):
        env, _ = ext_env
        result = runner.invoke(main, ["sdt", "footprint", "nope"], env=env)
        assert result.exit_code == 1

    def test_update_unknown_host_subset_fails(self, runner, ext_env):
        env, fx = ext_env
        prepared_store(runner, env, fx)
        run = json.loads(
            ok(
                runner.invoke(
                    main, ["audit", "run", fx["profile_id"], "--json"], env=env
                )
            ).output
        )
        result = runner.invoke(
            main, ["audit", "update", run["run_id"], "--hosts", "ghost-99"], env=env
        )
        assert result.exit_code == 1
        assert "ghost-99" in result.output


class TestBenchCommand:
    def test_deploy_writes_csv_and_summary(self, runner, tmp_path, store_env):
        out = tmp_path / "cdf.csv"
        result = ok(
            runner.invoke(
                main,
                [
                    "bench", "deploy", "--fixture", "minimal",
                    "--iterations", "3", "--seed", "2", "--out", str(out),
                ],
                env=store_env,
            )
        )
        assert "iterations: 3 ok, 0 failed" in result.output
        assert "footprint:" in result.output
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "iteration,latency_seconds"
        assert len(lines) == 4

    def test_include_collection_mode_runs(self, runner, store_env):
        result = ok(
            runner.invoke(
                main,
                [
                    "bench", "deploy", "--fixture", "minimal",
                    "--iterations", "2", "--include-collection",
                ],
                env=store_env,
            )
        )
        assert "iterations: 2 ok, 0 failed" in result.output


class TestHelp:
    def test_root_help_lists_groups(self, runner):
        result = ok(runner.invoke(main, ["--help"]))
        for group in ("fixture", "inventory", "profile", "audit", "sdt", "bench", "manager"):
            assert group in result.output
