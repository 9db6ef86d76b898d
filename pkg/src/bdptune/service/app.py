"""HTTP service exposing the tuning toolkit.

Every endpoint is stateless: requests carry the whole problem (link, current
configuration, model parameters) and responses carry the whole answer, so the
service can sit on the node being tuned and answer thin clients.  Domain
failures map to structured HTTP errors: bad inputs are 400, missing snapshot
files are 404, and failures to reach third hosts (probe and bench targets)
are 502.
"""

from __future__ import annotations

import argparse
from dataclasses import asdict

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .. import __version__, bench, model, probe, simulator, sysctl
from . import schemas


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": {"code": code, "message": message}})


def create_app() -> FastAPI:
    app = FastAPI(title="bdptune", version=__version__,
                  description="BDP-based TCP tuning advisor, throughput model, and probes")

    @app.exception_handler(sysctl.MissingTunableError)
    async def _missing(_req: Request, exc: sysctl.MissingTunableError):
        return _error(404, "missing-tunable", str(exc))

    @app.exception_handler(probe.NameResolutionError)
    async def _dns(_req: Request, exc: probe.NameResolutionError):
        return _error(502, "dns", str(exc))

    @app.exception_handler(probe.UnreachableHostError)
    async def _unreachable(_req: Request, exc: probe.UnreachableHostError):
        return _error(502, "unreachable", str(exc))

    @app.exception_handler(ConnectionError)
    async def _conn(_req: Request, exc: ConnectionError):
        return _error(502, "connect", f"cannot reach bench server: {exc}")

    @app.exception_handler(ValueError)
    async def _domain(_req: Request, exc: ValueError):
        return _error(400, "domain", str(exc))

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=list[schemas.PresetOut])
    def presets() -> list[schemas.PresetOut]:
        return [
            schemas.PresetOut(name=name, capacity_bps=capacity, base_rtt_s=rtt,
                              rtt_required=rtt is None)
            for name, (capacity, rtt) in model.preset_catalog().items()
        ]

    @app.post("/bdp", response_model=schemas.BdpResponse)
    def bdp(req: schemas.BdpRequest) -> schemas.BdpResponse:
        link = req.link.resolve()
        result = model.compute_bdp(link)
        return schemas.BdpResponse(
            capacity_bps=link.capacity_bps,
            base_rtt_s=link.base_rtt_s,
            bdp_bits=result.value,
            display=result.display,
        )

    @app.post("/advise", response_model=schemas.AdviseResponse)
    def advise(req: schemas.AdviseRequest) -> schemas.AdviseResponse:
        link = req.link.resolve()
        if req.sysctl_root is not None:
            tcp = sysctl.read_snapshot(req.sysctl_root).config
        elif req.tcp is not None:
            tcp = req.tcp.resolve()
        else:
            tcp = model.KERNEL_DEFAULT_TCP
        nic = req.nic.resolve()
        params = req.params.resolve()
        recs = model.advise(link, tcp, nic, params, headroom=req.headroom)
        sysctl_recs, link_recs = sysctl.split_recommendations(recs)
        recommended_nic = model.NicConfig(
            mtu_bytes=model.recommend_mtu(link, params),
            txqueuelen_packets=model.recommend_txqueuelen(link, nic),
        )
        commands = sysctl.emit_link_commands(req.iface, recommended_nic) if req.iface else []
        bdp_bits = model.compute_bdp(link)
        return schemas.AdviseResponse(
            bdp_bits=bdp_bits.value,
            bdp_display=bdp_bits.display,
            headroom=req.headroom,
            recommendations=[schemas.RecommendationOut.from_core(r) for r in recs],
            sysctl_conf=sysctl.emit_sysctl_conf(sysctl_recs),
            link_commands=commands,
        )

    def _tcp_for_sim(tcp: schemas.TcpIn | None, buffer_bytes: int | None) -> model.TcpBufferConfig:
        if buffer_bytes is not None:
            return simulator.uniform_buffer_config(buffer_bytes)
        if tcp is not None:
            return tcp.resolve()
        return model.KERNEL_DEFAULT_TCP

    @app.post("/simulate", response_model=schemas.PointOut)
    def simulate(req: schemas.SimulateRequest) -> schemas.PointOut:
        point = simulator.simulate_throughput(
            req.link.resolve(),
            _tcp_for_sim(req.tcp, req.buffer_bytes),
            req.nic.resolve(),
            req.params.resolve(),
        )
        return schemas.PointOut(**asdict(point))

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        link = req.link.resolve()
        params = req.params.resolve()
        nic = req.nic.resolve()
        tcp = _tcp_for_sim(req.tcp, req.buffer_bytes)
        if req.kind == "buffer":
            points = simulator.sweep_buffer(link, nic, params, [int(v) for v in req.values])
        elif req.kind == "mtu":
            points = simulator.sweep_mtu(
                link, tcp, params, [int(v) for v in req.values], nic.txqueuelen_packets
            )
        else:
            points = simulator.sweep_queue(
                link, tcp, params, [int(v) for v in req.values], nic.mtu_bytes
            )
        return schemas.SweepResponse(
            kind=req.kind, points=[schemas.PointOut(**asdict(p)) for p in points]
        )

    @app.get("/sysctl/snapshot", response_model=schemas.SnapshotResponse)
    def snapshot(root: str = Query(default=str(sysctl.DEFAULT_SYSCTL_ROOT))) -> schemas.SnapshotResponse:
        snap = sysctl.read_snapshot(root)
        return schemas.SnapshotResponse(
            root=str(snap.source_root),
            read_time=snap.read_time,
            values=snap.values,
            config=schemas.TcpIn.from_core(snap.config),
        )

    @app.post("/probe", response_model=schemas.ProbeResponse)
    def probe_rtt(req: schemas.ProbeRequest) -> schemas.ProbeResponse:
        report = probe.measure_rtt(
            req.host, req.port, samples=req.samples,
            timeout_s=req.timeout_s, spacing_s=req.spacing_s,
        )
        return schemas.ProbeResponse(
            host=req.host,
            port=req.port,
            samples_s=list(report.samples),
            min_s=report.min_s,
            median_s=report.median_s,
            mean_s=report.mean_s,
            stddev_s=report.stddev_s,
            failures=report.failures,
        )

    @app.post("/bench/run", response_model=schemas.BenchRunResponse)
    def bench_run(req: schemas.BenchRunRequest) -> schemas.BenchRunResponse:
        config = bench.BenchRunConfig(
            host=req.host,
            port=req.port,
            duration_s=req.duration_s,
            sndbuf_bytes=req.sndbuf_bytes,
            payload_pattern=req.payload_pattern,
            seed=req.seed,
        )
        report = bench.run_client(config)
        summary = None
        if report.summary is not None:
            summary = schemas.SummaryOut(**asdict(report.summary))
        return schemas.BenchRunResponse(
            side=report.side,
            samples=[schemas.SampleOut(**asdict(s)) for s in report.samples],
            summary=summary,
            truncated=report.truncated,
            effective_sndbuf_bytes=report.effective_sndbuf_bytes,
        )

    return app


app = create_app()


def main(argv: list[str] | None = None) -> int:
    """Run the service under uvicorn (console entry point)."""
    parser = argparse.ArgumentParser(prog="bdptune-api", description="Serve the tuning API over HTTP")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8437)
    args = parser.parse_args(argv)
    import uvicorn

    uvicorn.run("bdptune.service.app:app", host=args.host, port=args.port)
    return 0
