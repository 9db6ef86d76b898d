"""Command-line front end.

The CLI is a thin client: every computation goes through the HTTP service —
the bundled app in-process by default, or a remote instance named by
``--server`` / ``BDPTUNE_SERVER`` (a remote service probes, benches, and
snapshots from *its* vantage point).  Only ``bench-serve`` (a raw TCP
listener must live on the host under test) and ``report`` (a local file
formatter) run without the service.

Exit codes: 0 on success, 1 on domain errors (unreachable hosts, parse
failures, service errors), 2 on usage errors.  Data goes to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from . import __version__, bench, units
from .client import ApiClient, ApiError
from .model import PRESET_NAMES
from .simulator import ThroughputPoint, points_to_csv

PROG = "bdptune"


class UsageError(Exception):
    """Invalid flag combination detected after parsing."""


def _rate_arg(text: str) -> float:
    try:
        return units.parse_rate(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bytes_arg(text: str) -> int:
    try:
        return units.parse_bytes(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _time_arg(text: str) -> float:
    try:
        return units.parse_time(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_link_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=PRESET_NAMES,
                   help="named link scenario; home-dsl additionally needs --rtt")
    p.add_argument("--capacity", type=_rate_arg, metavar="RATE",
                   help="link capacity, e.g. 1e9, 10G, 501Mbps")
    p.add_argument("--rtt", type=_time_arg, metavar="TIME",
                   help="base round-trip time, e.g. 1.58ms, 150us, 0.02")
    p.add_argument("--loss", type=float, default=0.0, metavar="P",
                   help="stationary loss probability in [0,1] (default 0)")


def _link_payload(args: argparse.Namespace) -> dict:
    if args.preset is not None:
        if args.preset == "home-dsl" and args.rtt is None:
            raise UsageError("--preset home-dsl has no canonical RTT; give --rtt")
        return {"preset": args.preset, "base_rtt_s": args.rtt, "loss_rate": args.loss}
    if args.capacity is None:
        raise UsageError("give --preset, or --capacity together with --rtt")
    if args.rtt is None:
        raise UsageError("--capacity requires --rtt")
    return {"capacity_bps": args.capacity, "base_rtt_s": args.rtt, "loss_rate": args.loss}


def _add_params_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters")
    g.add_argument("--window-fraction", type=float, dest="window_fraction")
    g.add_argument("--overflow-loss-coeff", type=float, dest="overflow_loss_coeff")
    g.add_argument("--overflow-decay", type=float, dest="overflow_decay")
    g.add_argument("--background-loss", type=float, dest="background_loss_rate")
    g.add_argument("--loss-threshold", type=float, dest="loss_threshold")
    g.add_argument("--jumbo-mtu", type=int, dest="jumbo_mtu_bytes")
    g.add_argument("--header-overhead", type=int, dest="header_overhead_bytes")
    g.add_argument("--framing-overhead", type=int, dest="framing_overhead_bytes")


_PARAM_FIELDS = (
    "window_fraction", "overflow_loss_coeff", "overflow_decay", "background_loss_rate",
    "loss_threshold", "jumbo_mtu_bytes", "header_overhead_bytes", "framing_overhead_bytes",
)


def _params_payload(args: argparse.Namespace) -> dict:
    return {name: getattr(args, name) for name in _PARAM_FIELDS
            if getattr(args, name, None) is not None}


def _ms(seconds: float) -> str:
    return f"{seconds * 1e3:.3f} ms"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="TCP tuning toolkit: BDP math, tunable recommendations, "
                    "a throughput model, and validation probes.",
    )
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    parser.add_argument("--server", default=os.environ.get("BDPTUNE_SERVER"),
                        help="tuning service URL (env BDPTUNE_SERVER); "
                             "default runs the bundled service in-process")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("probe", help="measure TCP handshake RTT to a host")
    p.add_argument("host")
    p.add_argument("--port", type=int, default=443)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--timeout", type=_time_arg, default=2.0, metavar="TIME")
    p.add_argument("--spacing", type=_time_arg, default=0.1, metavar="TIME")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_probe)

    p = sub.add_parser("advise", help="recommend buffer, MTU, and queue tunables")
    _add_link_flags(p)
    p.add_argument("--sysctl-root", default=os.environ.get("BDPTUNE_SYSCTL_ROOT"),
                   help="read current tunables from this /proc/sys-style tree "
                        "(env BDPTUNE_SYSCTL_ROOT); default assumes classic kernel values")
    p.add_argument("--mtu", type=int, default=1500, help="current interface MTU (default 1500)")
    p.add_argument("--txqueuelen", type=int, default=1000,
                   help="current transmit queue length (default 1000)")
    p.add_argument("--headroom", type=float, default=2.0,
                   help="buffer ceiling target as a multiple of BDP (default 2.0)")
    p.add_argument("--iface", help="interface name for emitted ip-link commands")
    p.add_argument("--emit-conf", action="store_true",
                   help="also print a sysctl.conf snippet (and ip-link commands with --iface)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_advise)

    p = sub.add_parser("simulate", help="model steady-state throughput for one configuration")
    _add_link_flags(p)
    p.add_argument("--buffer", type=_bytes_arg, metavar="BYTES",
                   help="set all four buffer ceilings to this size, e.g. 256M or 16Mi "
                        "(default: classic kernel config)")
    p.add_argument("--mtu", type=int, default=1500)
    p.add_argument("--queue", type=int, default=1000, help="transmit queue length in packets")
    _add_params_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep buffer size, MTU, or queue length")
    p.add_argument("kind", choices=("buffer", "mtu", "queue"))
    _add_link_flags(p)
    p.add_argument("--values", required=True, metavar="LIST",
                   help="comma-separated swept values; byte units allowed for buffer "
                        "sweeps, e.g. 87380,1Mi,16Mi")
    p.add_argument("--buffer", type=_bytes_arg, metavar="BYTES",
                   help="fixed buffer ceiling for mtu/queue sweeps")
    p.add_argument("--mtu", type=int, default=1500, help="fixed MTU for buffer/queue sweeps")
    p.add_argument("--queue", type=int, default=1000,
                   help="fixed queue length for buffer/mtu sweeps")
    _add_params_flags(p)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("bench-serve", help="run a throughput sink (raw TCP byte stream)")
    p.add_argument("--port", type=int, default=bench.DEFAULT_BENCH_PORT)
    p.add_argument("--bind", default="0.0.0.0")
    p.add_argument("--rcvbuf", type=_bytes_arg, metavar="BYTES",
                   help="receive-buffer override applied before accepting")
    p.add_argument("--one-shot", action="store_true", help="serve one session and exit")
    p.add_argument("--format", choices=("text", "json", "csv"), default="json")
    p.set_defaults(handler=cmd_bench_serve)

    p = sub.add_parser("bench-run", help="send to a throughput sink for a fixed duration")
    p.add_argument("host")
    p.add_argument("--port", type=int, default=bench.DEFAULT_BENCH_PORT)
    p.add_argument("--duration", type=_time_arg, default=10.0, metavar="TIME")
    p.add_argument("--sndbuf", type=_bytes_arg, metavar="BYTES",
                   help="send-buffer override applied before connecting")
    p.add_argument("--pattern", choices=bench.PAYLOAD_PATTERNS, default="zeros")
    p.add_argument("--seed", type=int, help="seed for the pseudorandom payload")
    p.add_argument("--format", choices=("text", "json", "csv"), default="json")
    p.set_defaults(handler=cmd_bench_run)

    p = sub.add_parser("report", help="summarize a saved bench JSONL file")
    p.add_argument("file", help="bench output path, or - for stdin")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(handler=cmd_report)

    return parser


def cmd_probe(args: argparse.Namespace, client: ApiClient) -> int:
    payload = {
        "host": args.host, "port": args.port, "samples": args.samples,
        "timeout_s": args.timeout, "spacing_s": args.spacing,
    }
    budget = args.samples * (args.timeout + args.spacing) + 10.0
    data = client.post("/probe", payload, timeout_s=budget)
    if args.format == "json":
        print(json.dumps(data, indent=2))
        return 0
    ok = len(data["samples_s"])
    print(f"{data['host']}:{data['port']} — {ok} handshakes, {data['failures']} failed")
    print(f"min {_ms(data['min_s'])} | median {_ms(data['median_s'])} | "
          f"mean {_ms(data['mean_s'])} | stddev {_ms(data['stddev_s'])}")
    return 0


def cmd_advise(args: argparse.Namespace, client: ApiClient) -> int:
    payload = {
        "link": _link_payload(args),
        "nic": {"mtu_bytes": args.mtu, "txqueuelen_packets": args.txqueuelen},
        "headroom": args.headroom,
        "sysctl_root": args.sysctl_root,
        "iface": args.iface,
    }
    data = client.post("/advise", payload)
    if args.format == "json":
        print(json.dumps(data, indent=2))
        return 0
    print(f"BDP: {data['bdp_display']} ({data['bdp_bits']:,.0f} bits), "
          f"headroom {data['headroom']:g}x")
    for rec in data["recommendations"]:
        if rec["changed"]:
            print(f"{rec['key']}: {rec['current']} -> {rec['recommended']}  [CHANGE]")
        else:
            print(f"{rec['key']}: {rec['current']}  (unchanged)")
        print(f"    {rec['rationale']}")
    if args.emit_conf:
        print()
        print(data["sysctl_conf"], end="")
        for command in data["link_commands"]:
            print(command)
    return 0


def cmd_simulate(args: argparse.Namespace, client: ApiClient) -> int:
    payload = {
        "link": _link_payload(args),
        "buffer_bytes": args.buffer,
        "nic": {"mtu_bytes": args.mtu, "txqueuelen_packets": args.queue},
        "params": _params_payload(args),
    }
    data = client.post("/simulate", payload)
    if args.format == "json":
        print(json.dumps(data, indent=2))
        return 0
    print(f"throughput: {units.format_rate(data['throughput_bps'])} "
          f"({data['throughput_bps']:,.0f} bps)")
    print(f"limited by: {data['limiting_factor']}")
    return 0


def _parse_values(raw: str, kind: str) -> list[float]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise UsageError("--values must name at least one value")
    try:
        if kind == "buffer":
            return [float(units.parse_bytes(item)) for item in items]
        return [float(int(item)) for item in items]
    except ValueError as exc:
        raise UsageError(f"bad --values entry: {exc}") from None


def cmd_sweep(args: argparse.Namespace, client: ApiClient) -> int:
    payload = {
        "kind": args.kind,
        "link": _link_payload(args),
        "values": _parse_values(args.values, args.kind),
        "buffer_bytes": args.buffer,
        "nic": {"mtu_bytes": args.mtu, "txqueuelen_packets": args.queue},
        "params": _params_payload(args),
    }
    data = client.post("/sweep", payload)
    points = [ThroughputPoint(p["x"], p["throughput_bps"], p["limiting_factor"])
              for p in data["points"]]
    if args.format == "json":
        print(json.dumps(data, indent=2))
    elif args.format == "csv":
        print(points_to_csv(points), end="")
    else:
        width = max(len(f"{p.x:g}") for p in points)
        for p in points:
            print(f"{p.x:>{width}g}  {units.format_rate(p.throughput_bps):>12}  {p.limiting_factor}")
    return 0


def _human_sample(sample: bench.BenchSample) -> str:
    return (f"[{sample.t:4d}] {sample.bytes:,} B  "
            f"{units.format_rate(sample.inst_bps)}  avg {units.format_rate(sample.cum_avg_bps)}")


def _print_report(report: bench.BenchReport, fmt: str, streamed: bool) -> None:
    if fmt == "json":
        if streamed:  # samples already printed live; just close with the summary
            print(json.dumps({"summary": bench.summary_dict(report)}), flush=True)
        else:
            print(bench.report_to_jsonl(report), end="")
    elif fmt == "csv":
        print(bench.report_to_csv(report), end="")
    else:
        if not streamed:
            for sample in report.samples:
                print(_human_sample(sample))
        s = report.summary
        if s is None:
            print("no data transferred")
        else:
            note = " (truncated)" if report.truncated else ""
            print(f"{report.side}: {s.total_bytes:,} B in {s.elapsed_s:.2f} s — "
                  f"mean {units.format_rate(s.mean_inst_bps)}, "
                  f"final avg {units.format_rate(s.final_cum_avg_bps)}{note}")


def cmd_bench_serve(args: argparse.Namespace, client: ApiClient) -> int:
    del client  # a listener is host-bound; this subcommand always runs locally
    streamed = args.format in ("json", "text")
    if streamed:
        on_sample = (lambda s: print(bench.sample_to_json(s), flush=True)) \
            if args.format == "json" else (lambda s: print(_human_sample(s), flush=True))
    else:
        on_sample = None
    try:
        server = bench.BenchServer(args.port, args.rcvbuf, args.bind)
    except OSError as exc:
        print(f"error: cannot listen on {args.bind}:{args.port}: {exc}", file=sys.stderr)
        return 1
    print(f"listening on {args.bind}:{server.port} "
          f"(effective rcvbuf {server.effective_rcvbuf} B)", file=sys.stderr)
    try:
        while True:
            report = server.serve_once(on_sample=on_sample)
            _print_report(report, args.format, streamed)
            if args.one_shot:
                return 0
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 0
    finally:
        server.close()


def cmd_bench_run(args: argparse.Namespace, client: ApiClient) -> int:
    payload = {
        "host": args.host, "port": args.port, "duration_s": args.duration,
        "sndbuf_bytes": args.sndbuf, "payload_pattern": args.pattern, "seed": args.seed,
    }
    data = client.post("/bench/run", payload, timeout_s=args.duration + 30.0)
    samples = [bench.BenchSample(s["t"], s["bytes"], s["inst_bps"], s["cum_avg_bps"])
               for s in data["samples"]]
    summary = bench.BenchSummary(**data["summary"]) if data["summary"] else None
    report = bench.BenchReport(
        side=data["side"], samples=samples, summary=summary,
        truncated=data["truncated"], effective_sndbuf_bytes=data["effective_sndbuf_bytes"],
    )
    _print_report(report, args.format, streamed=False)
    return 0


def cmd_report(args: argparse.Namespace, client: ApiClient) -> int:
    del client
    text = sys.stdin.read() if args.file == "-" else open(args.file).read()
    samples, summary_data = bench.parse_jsonl(text)
    if not samples and not summary_data:
        raise ValueError("no samples or summary found in input")
    if summary_data is not None and summary_data.get("mean_inst_bps") is not None:
        summary = bench.BenchSummary(**{
            k: summary_data[k]
            for k in ("total_bytes", "elapsed_s", "mean_inst_bps", "min_inst_bps",
                      "max_inst_bps", "final_cum_avg_bps")
        })
    elif samples:
        summary = bench.summarize(samples)
    else:
        summary = None
    report = bench.BenchReport(
        side=(summary_data or {}).get("side", "unknown"),
        samples=samples,
        summary=summary,
        truncated=bool((summary_data or {}).get("truncated", False)),
        effective_sndbuf_bytes=(summary_data or {}).get("effective_sndbuf_bytes"),
        effective_rcvbuf_bytes=(summary_data or {}).get("effective_rcvbuf_bytes"),
    )
    _print_report(report, args.format, streamed=False)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ApiClient(args.server)
    try:
        return args.handler(args, client)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ApiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
