"""HTTP API surface: happy paths, error mapping, and exact numeric parity."""

import threading

import pytest
from fastapi.testclient import TestClient

from bdptune import __version__
from bdptune.bench import BenchServer
from bdptune.service.app import create_app

CHANGED_DC10G = {
    "net.ipv4.tcp_rmem",
    "net.ipv4.tcp_wmem",
    "net.core.rmem_max",
    "net.core.wmem_max",
    "mtu",
    "txqueuelen",
}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as test_client:
        yield test_client


class TestHealthAndPresets:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "version": __version__}

    def test_presets_catalog(self, client):
        response = client.get("/presets")
        assert response.status_code == 200
        by_name = {p["name"]: p for p in response.json()}
        assert set(by_name) == {"home-lan", "home-dsl", "dc-1g", "dc-10g"}
        assert by_name["dc-10g"]["capacity_bps"] == 1e10
        assert by_name["dc-10g"]["base_rtt_s"] == 1.58e-3
        assert by_name["home-dsl"]["base_rtt_s"] is None
        assert by_name["home-dsl"]["rtt_required"] is True
        assert by_name["home-lan"]["rtt_required"] is False


class TestBdp:
    def test_preset(self, client):
        response = client.post("/bdp", json={"link": {"preset": "dc-10g"}})
        assert response.status_code == 200
        body = response.json()
        assert body["bdp_bits"] == 15_800_000.0
        assert body["display"] == "15.8 Mbit"
        assert body["capacity_bps"] == 1e10

    def test_explicit_link(self, client):
        response = client.post("/bdp", json={
            "link": {"capacity_bps": 1e9, "base_rtt_s": 0.12e-3}})
        assert response.json()["bdp_bits"] == pytest.approx(120_000.0, rel=1e-12)

    def test_home_dsl_requires_rtt(self, client):
        response = client.post("/bdp", json={"link": {"preset": "home-dsl"}})
        assert response.status_code == 400
        assert response.json()["detail"]["code"] == "domain"

    def test_home_dsl_with_rtt(self, client):
        response = client.post("/bdp", json={
            "link": {"preset": "home-dsl", "base_rtt_s": 0.02}})
        assert response.status_code == 200
        assert response.json()["bdp_bits"] == pytest.approx(2e5)

    def test_unknown_preset_rejected(self, client):
        response = client.post("/bdp", json={"link": {"preset": "datacenter"}})
        assert response.status_code == 422

    def test_incomplete_link_rejected(self, client):
        response = client.post("/bdp", json={"link": {"capacity_bps": 1e9}})
        assert response.status_code == 422

    def test_negative_capacity_rejected(self, client):
        response = client.post("/bdp", json={
            "link": {"capacity_bps": -1, "base_rtt_s": 0.001}})
        assert response.status_code == 422


class TestAdvise:
    def test_dc_10g_with_snapshot_root(self, client, kernel_tree):
        response = client.post("/advise", json={
            "link": {"preset": "dc-10g"},
            "sysctl_root": str(kernel_tree),
            "iface": "eth0",
        })
        assert response.status_code == 200
        body = response.json()
        assert body["bdp_display"] == "15.8 Mbit"
        changed = {r["key"] for r in body["recommendations"] if r["changed"]}
        assert changed == CHANGED_DC10G
        assert "net.core.rmem_max = 3952640" in body["sysctl_conf"]
        assert body["link_commands"] == [
            "ip link set dev eth0 mtu 9000",
            "ip link set dev eth0 txqueuelen 8000",
        ]

    def test_home_lan_changes_nothing(self, client):
        response = client.post("/advise", json={"link": {"preset": "home-lan"}})
        assert response.status_code == 200
        body = response.json()
        assert not any(r["changed"] for r in body["recommendations"])
        assert body["link_commands"] == []

    def test_defaults_used_without_tcp_or_root(self, client):
        response = client.post("/advise", json={"link": {"preset": "dc-10g"}})
        changed = {r["key"] for r in response.json()["recommendations"] if r["changed"]}
        assert changed == CHANGED_DC10G

    def test_missing_root_is_404(self, client, tmp_path):
        response = client.post("/advise", json={
            "link": {"preset": "dc-10g"},
            "sysctl_root": str(tmp_path / "nope"),
        })
        assert response.status_code == 404
        assert response.json()["detail"]["code"] == "missing-tunable"

    def test_headroom_below_one_rejected(self, client):
        response = client.post("/advise", json={
            "link": {"preset": "dc-10g"}, "headroom": 0.5})
        assert response.status_code == 422

    def test_rationales_cite_the_bdp(self, client):
        response = client.post("/advise", json={"link": {"preset": "dc-10g"}})
        buffer_recs = [r for r in response.json()["recommendations"]
                       if r["key"] == "net.ipv4.tcp_rmem"]
        assert "15,800,000 bits" in buffer_recs[0]["rationale"]


class TestSimulate:
    def test_home_lan_defaults(self, client):
        response = client.post("/simulate", json={"link": {"preset": "home-lan"}})
        assert response.status_code == 200
        body = response.json()
        assert body["throughput_bps"] == 949_284_785.4356307
        assert body["limiting_factor"] == "capacity"

    def test_dc_10g_defaults_window_limited(self, client):
        response = client.post("/simulate", json={"link": {"preset": "dc-10g"}})
        body = response.json()
        assert body["throughput_bps"] == 442_430_379.7468354
        assert body["limiting_factor"] == "window"

    def test_buffer_bytes_shortcut(self, client):
        response = client.post("/simulate", json={
            "link": {"preset": "dc-10g"}, "buffer_bytes": 2_000_000,
            "nic": {"txqueuelen_packets": 16000},
        })
        body = response.json()
        assert body["throughput_bps"] == pytest.approx(1e10 * 1460 / 1538, rel=1e-12)
        assert body["limiting_factor"] == "capacity"

    def test_zero_buffer_rejected(self, client):
        response = client.post("/simulate", json={
            "link": {"preset": "dc-10g"}, "buffer_bytes": 0})
        assert response.status_code == 422


class TestSweep:
    def test_queue_sweep_interior_maximum(self, client):
        response = client.post("/sweep", json={
            "kind": "queue",
            "link": {"preset": "dc-10g"},
            "buffer_bytes": 256_000_000,
            "values": [1000, 2000, 4000, 8000, 16000],
        })
        assert response.status_code == 200
        body = response.json()
        assert body["kind"] == "queue"
        series = [p["throughput_bps"] for p in body["points"]]
        assert body["points"][series.index(max(series))]["x"] == 8000
        assert all(p["limiting_factor"] == "loss" for p in body["points"])

    def test_buffer_sweep_constant_on_home_lan(self, client):
        response = client.post("/sweep", json={
            "kind": "buffer",
            "link": {"preset": "home-lan"},
            "values": [87380, 1048576, 16777216],
        })
        series = [p["throughput_bps"] for p in response.json()["points"]]
        assert series[0] == series[1] == series[2] == 949_284_785.4356307

    def test_mtu_sweep_strictly_increasing(self, client):
        response = client.post("/sweep", json={
            "kind": "mtu",
            "link": {"preset": "dc-10g"},
            "buffer_bytes": 4_000_000,
            "nic": {"txqueuelen_packets": 16000},
            "values": [1500, 9000, 10000],
        })
        series = [p["throughput_bps"] for p in response.json()["points"]]
        assert series[0] < series[1] < series[2]

    def test_unknown_kind_rejected(self, client):
        response = client.post("/sweep", json={
            "kind": "jumbo", "link": {"preset": "dc-10g"}, "values": [1]})
        assert response.status_code == 422

    def test_empty_values_rejected(self, client):
        response = client.post("/sweep", json={
            "kind": "buffer", "link": {"preset": "dc-10g"}, "values": []})
        assert response.status_code == 422

    def test_nonpositive_value_is_domain_error(self, client):
        response = client.post("/sweep", json={
            "kind": "buffer", "link": {"preset": "dc-10g"}, "values": [0]})
        assert response.status_code == 400
        assert response.json()["detail"]["code"] == "domain"


class TestSnapshot:
    def test_reads_fixture_tree(self, client, kernel_tree):
        response = client.get("/sysctl/snapshot", params={"root": str(kernel_tree)})
        assert response.status_code == 200
        body = response.json()
        assert body["root"] == str(kernel_tree)
        assert body["values"]["net.ipv4.tcp_rmem"] == "4096\t16384\t87380"
        assert body["config"]["rmem"] == {"min": 4096, "default": 16384, "max": 87380}
        assert body["config"]["rmem_max"] == 212_992

    def test_missing_tree_is_404(self, client, tmp_path):
        response = client.get("/sysctl/snapshot", params={"root": str(tmp_path / "gone")})
        assert response.status_code == 404
        assert response.json()["detail"]["code"] == "missing-tunable"


class TestProbe:
    def test_loopback(self, client, tcp_listener):
        host, port = tcp_listener
        response = client.post("/probe", json={
            "host": host, "port": port, "samples": 4, "spacing_s": 0.01})
        assert response.status_code == 200
        body = response.json()
        assert body["failures"] == 0
        assert len(body["samples_s"]) == 4
        assert body["min_s"] <= body["median_s"] <= max(body["samples_s"])

    def test_unreachable_is_502(self, client):
        import socket
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            free_port = sock.getsockname()[1]
        response = client.post("/probe", json={
            "host": "127.0.0.1", "port": free_port,
            "samples": 2, "timeout_s": 0.5, "spacing_s": 0})
        assert response.status_code == 502
        assert response.json()["detail"]["code"] == "unreachable"

    def test_bad_name_is_502_dns(self, client):
        response = client.post("/probe", json={
            "host": "bdptune-nonexistent.invalid", "port": 443, "samples": 1})
        assert response.status_code == 502
        assert response.json()["detail"]["code"] == "dns"

    def test_zero_samples_rejected(self, client, tcp_listener):
        host, port = tcp_listener
        response = client.post("/probe", json={"host": host, "port": port, "samples": 0})
        assert response.status_code == 422


class TestBenchRun:
    def test_loopback_run(self, client):
        with BenchServer(port=0, bind_host="127.0.0.1") as server:
            holder = {}
            thread = threading.Thread(
                target=lambda: holder.update(report=server.serve_once()), daemon=True)
            thread.start()
            response = client.post("/bench/run", json={
                "host": "127.0.0.1", "port": server.port, "duration_s": 1})
            thread.join(10.0)
        assert response.status_code == 200
        body = response.json()
        assert body["side"] == "sender"
        assert body["truncated"] is False
        assert body["summary"]["total_bytes"] == holder["report"].summary.total_bytes
        assert len(body["samples"]) >= 1

    def test_refused_connection_is_502(self, client):
        import socket
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            free_port = sock.getsockname()[1]
        response = client.post("/bench/run", json={
            "host": "127.0.0.1", "port": free_port, "duration_s": 1})
        assert response.status_code == 502
        assert response.json()["detail"]["code"] == "connect"

    def test_subsecond_duration_rejected(self, client):
        response = client.post("/bench/run", json={
            "host": "127.0.0.1", "duration_s": 0.5})
        assert response.status_code == 422
