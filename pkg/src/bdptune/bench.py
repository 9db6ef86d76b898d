"""Loopback/LAN throughput bench: a byte-sink server and a timed sender.

The wire format is a raw TCP byte stream — no framing, no control channel —
so the numbers measure the stack, not a protocol.  A sampler thread emits
per-second readings while the transfer loop only moves bytes and bumps a
counter; sample emission never sits on the transfer path.

Conservation is exact: the per-interval byte counts partition the stream, a
final partial-interval sample flushes the remainder, and their sum equals the
transfer total to the byte.
"""

from __future__ import annotations

import json
import logging
import random
import socket
import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable

log = logging.getLogger(__name__)

DEFAULT_BENCH_PORT = 5201
DEFAULT_CHUNK_BYTES = 64 * 1024
SAMPLE_INTERVAL_S = 1.0
SAMPLE_CSV_HEADER = "t,bytes,inst_bps,cum_avg_bps"

PAYLOAD_PATTERNS = ("zeros", "random")

OnSample = Callable[["BenchSample"], None]


@dataclass(frozen=True)
class BenchSample:
    """One sampling interval: index, bytes moved, instantaneous and running rates."""

    t: int
    bytes: int
    inst_bps: float
    cum_avg_bps: float


@dataclass(frozen=True)
class BenchSummary:
    """Whole-run totals and per-interval rate statistics."""

    total_bytes: int
    elapsed_s: float
    mean_inst_bps: float
    min_inst_bps: float
    max_inst_bps: float
    final_cum_avg_bps: float


@dataclass(frozen=True)
class BenchReport:
    """Everything one side of a bench run observed."""

    side: str  # "sender" | "receiver"
    samples: list[BenchSample]
    summary: BenchSummary | None
    truncated: bool = False
    effective_sndbuf_bytes: int | None = None
    effective_rcvbuf_bytes: int | None = None


@dataclass(frozen=True)
class BenchRunConfig:
    """Client-side run parameters."""

    host: str
    port: int = DEFAULT_BENCH_PORT
    duration_s: float = 10.0
    sndbuf_bytes: int | None = None
    rcvbuf_bytes: int | None = None
    payload_pattern: str = "zeros"
    seed: int | None = None
    chunk_bytes: int = DEFAULT_CHUNK_BYTES

    def __post_init__(self) -> None:
        if self.duration_s < 1:
            raise ValueError(f"duration_s must be >= 1, got {self.duration_s}")
        if self.payload_pattern not in PAYLOAD_PATTERNS:
            raise ValueError(
                f"payload_pattern must be one of {PAYLOAD_PATTERNS}, got {self.payload_pattern!r}"
            )
        for name in ("sndbuf_bytes", "rcvbuf_bytes"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive when given, got {v}")
        if self.chunk_bytes <= 0:
            raise ValueError(f"chunk_bytes must be positive, got {self.chunk_bytes}")


class PayloadSource:
    """Deterministic chunk generator: all-zeros or seeded pseudorandom."""

    def __init__(self, pattern: str = "zeros", seed: int | None = None,
                 chunk_bytes: int = DEFAULT_CHUNK_BYTES):
        if pattern not in PAYLOAD_PATTERNS:
            raise ValueError(f"pattern must be one of {PAYLOAD_PATTERNS}, got {pattern!r}")
        self.pattern = pattern
        self.seed = 0 if (pattern == "random" and seed is None) else seed
        self.chunk_bytes = chunk_bytes
        self._zeros = bytes(chunk_bytes)
        self._rng = random.Random(self.seed) if pattern == "random" else None

    def chunk(self) -> bytes:
        if self._rng is None:
            return self._zeros
        return self._rng.randbytes(self.chunk_bytes)


class _Meter:
    """Byte counter plus a sampler thread emitting per-interval readings.

    The transfer loop is the single writer of the counter; the sampler only
    reads it, so no lock sits on the hot path.  Sampling uses absolute
    deadlines from the stream start, so interval indexes do not drift.
    """

    def __init__(self, interval_s: float = SAMPLE_INTERVAL_S, on_sample: OnSample | None = None):
        self.interval_s = interval_s
        self.on_sample = on_sample
        self.samples: list[BenchSample] = []
        self._count = 0
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="bench-sampler", daemon=True)
        self._start_t = 0.0
        self._last_bytes = 0
        self._last_t = 0.0
        self._next_index = 1

    def start(self) -> None:
        self._start_t = time.perf_counter()
        self._last_t = self._start_t
        self._thread.start()

    def add(self, nbytes: int) -> None:
        self._count += nbytes

    def _emit(self, index: int, now: float, count: int) -> None:
        delta = count - self._last_bytes
        dt = max(now - self._last_t, 1e-9)
        elapsed = max(now - self._start_t, 1e-9)
        sample = BenchSample(
            t=index,
            bytes=delta,
            inst_bps=delta * 8 / dt,
            cum_avg_bps=count * 8 / elapsed,
        )
        self.samples.append(sample)
        self._last_bytes = count
        self._last_t = now
        if self.on_sample is not None:
            self.on_sample(sample)

    def _run(self) -> None:
        while True:
            deadline = self._start_t + self._next_index * self.interval_s
            delay = deadline - time.perf_counter()
            if self._stop.wait(max(0.0, delay)):
                return
            self._emit(self._next_index, time.perf_counter(), self._count)
            self._next_index += 1

    def stop(self) -> tuple[list[BenchSample], int, float]:
        """Stop sampling, flush any partial interval, return (samples, total, elapsed)."""
        self._stop.set()
        self._thread.join()
        end_t = time.perf_counter()
        total = self._count
        if total > self._last_bytes:
            self._emit(self._next_index, end_t, total)
        return self.samples, total, end_t - self._start_t


def summarize(samples: Iterable[BenchSample], elapsed_s: float | None = None) -> BenchSummary:
    """Collapse samples into totals and rate statistics.

    When the true wall-clock ``elapsed_s`` is not supplied it is reconstructed
    from the final running average, which was computed over the same window.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("cannot summarize an empty sample list")
    total = sum(s.bytes for s in samples)
    final_cum = samples[-1].cum_avg_bps
    inst = [s.inst_bps for s in samples]
    if elapsed_s is None:
        elapsed_s = total * 8 / final_cum if final_cum > 0 else 0.0
    return BenchSummary(
        total_bytes=total,
        elapsed_s=elapsed_s,
        mean_inst_bps=sum(inst) / len(inst),
        min_inst_bps=min(inst),
        max_inst_bps=max(inst),
        final_cum_avg_bps=final_cum,
    )


class BenchServer:
    """A listening byte sink.

    A receive-buffer override is applied to the listening socket before any
    connection exists, so accepted sockets inherit it while the window is
    still being negotiated.  Binding port 0 picks a free port, available as
    ``.port``.
    """

    def __init__(self, port: int = DEFAULT_BENCH_PORT, rcvbuf_bytes: int | None = None,
                 bind_host: str = "0.0.0.0", interval_s: float = SAMPLE_INTERVAL_S):
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        if rcvbuf_bytes is not None:
            if rcvbuf_bytes <= 0:
                raise ValueError(f"rcvbuf_bytes must be positive, got {rcvbuf_bytes}")
            self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, rcvbuf_bytes)
        self._listener.bind((bind_host, port))
        self._listener.listen(1)
        self.effective_rcvbuf = self._listener.getsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF)
        if rcvbuf_bytes is not None and self.effective_rcvbuf < rcvbuf_bytes:
            log.warning(
                "requested rcvbuf %d clamped by the socket layer to %d",
                rcvbuf_bytes, self.effective_rcvbuf,
            )
        self.port = self._listener.getsockname()[1]
        self.interval_s = interval_s

    def serve_once(self, on_sample: OnSample | None = None,
                   accept_timeout_s: float | None = None) -> BenchReport:
        """Accept one connection, sink it to EOF, and report.

        If no client arrives within ``accept_timeout_s`` the report is empty.
        """
        self._listener.settimeout(accept_timeout_s)
        try:
            conn, _peer = self._listener.accept()
        except TimeoutError:
            return BenchReport(side="receiver", samples=[], summary=None,
                               effective_rcvbuf_bytes=self.effective_rcvbuf)
        truncated = False
        meter = _Meter(self.interval_s, on_sample)
        with conn:
            meter.start()
            while True:
                try:
                    data = conn.recv(DEFAULT_CHUNK_BYTES)
                except (ConnectionResetError, TimeoutError, OSError):
                    truncated = True
                    break
                if not data:
                    break
                meter.add(len(data))
        samples, total, elapsed = meter.stop()
        summary = summarize(samples, elapsed_s=elapsed) if samples else None
        assert summary is None or summary.total_bytes == total
        return BenchReport(
            side="receiver",
            samples=samples,
            summary=summary,
            truncated=truncated,
            effective_rcvbuf_bytes=self.effective_rcvbuf,
        )

    def close(self) -> None:
        self._listener.close()

    def __enter__(self) -> "BenchServer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def run_client(config: BenchRunConfig, on_sample: OnSample | None = None) -> BenchReport:
    """Send payload to a bench server for the configured duration.

    Bytes are counted only after ``sendall`` hands them to the stack, so the
    sender's total equals what enters the stream.  A peer disconnect
    mid-stream yields a truncated report instead of an exception.
    """
    source = PayloadSource(config.payload_pattern, config.seed, config.chunk_bytes)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        if config.sndbuf_bytes is not None:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF, config.sndbuf_bytes)
        if config.rcvbuf_bytes is not None:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, config.rcvbuf_bytes)
        sock.connect((config.host, config.port))
        effective_sndbuf = sock.getsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF)
        if config.sndbuf_bytes is not None and effective_sndbuf < config.sndbuf_bytes:
            log.warning(
                "requested sndbuf %d clamped by the socket layer to %d",
                config.sndbuf_bytes, effective_sndbuf,
            )

        truncated = False
        meter = _Meter(on_sample=on_sample)
        meter.start()
        deadline = time.perf_counter() + config.duration_s
        while time.perf_counter() < deadline:
            try:
                sock.sendall(source.chunk())
            except (BrokenPipeError, ConnectionResetError):
                truncated = True
                break
            meter.add(config.chunk_bytes)
        samples, total, elapsed = meter.stop()

        if not truncated:
            # Half-close, then wait briefly for the receiver to drain and
            # close, so its byte count settles before we tear down.
            try:
                sock.shutdown(socket.SHUT_WR)
                sock.settimeout(10.0)
                while sock.recv(4096):
                    pass
            except OSError:
                pass
    finally:
        sock.close()

    summary = summarize(samples, elapsed_s=elapsed) if samples else None
    assert summary is None or summary.total_bytes == total
    return BenchReport(
        side="sender",
        samples=samples,
        summary=summary,
        truncated=truncated,
        effective_sndbuf_bytes=effective_sndbuf,
    )


def summary_dict(report: BenchReport) -> dict:
    base = {
        "side": report.side,
        "truncated": report.truncated,
        "effective_sndbuf_bytes": report.effective_sndbuf_bytes,
        "effective_rcvbuf_bytes": report.effective_rcvbuf_bytes,
    }
    if report.summary is None:
        base.update(total_bytes=0, elapsed_s=0.0, mean_inst_bps=None,
                    min_inst_bps=None, max_inst_bps=None, final_cum_avg_bps=None)
    else:
        s = report.summary
        base.update(
            total_bytes=s.total_bytes,
            elapsed_s=s.elapsed_s,
            mean_inst_bps=s.mean_inst_bps,
            min_inst_bps=s.min_inst_bps,
            max_inst_bps=s.max_inst_bps,
            final_cum_avg_bps=s.final_cum_avg_bps,
        )
    return base


def sample_to_json(sample: BenchSample) -> str:
    return json.dumps({
        "t": sample.t,
        "bytes": sample.bytes,
        "inst_bps": sample.inst_bps,
        "cum_avg_bps": sample.cum_avg_bps,
    })


def report_to_jsonl(report: BenchReport) -> str:
    """JSON Lines: one object per sample, then one ``{"summary": ...}`` object."""
    lines = [sample_to_json(s) for s in report.samples]
    lines.append(json.dumps({"summary": summary_dict(report)}))
    return "\n".join(lines) + "\n"


def report_to_csv(report: BenchReport) -> str:
    """CSV with the same per-sample columns as the JSON Lines form."""
    lines = [SAMPLE_CSV_HEADER]
    for s in report.samples:
        lines.append(f"{s.t},{s.bytes},{s.inst_bps!r},{s.cum_avg_bps!r}")
    return "\n".join(lines) + "\n"


def parse_jsonl(text: str) -> tuple[list[BenchSample], dict | None]:
    """Parse bench JSON Lines back into samples and the summary mapping."""
    samples: list[BenchSample] = []
    summary: dict | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON: {exc}") from None
        if "summary" in obj:
            summary = obj["summary"]
        else:
            try:
                samples.append(BenchSample(
                    t=int(obj["t"]),
                    bytes=int(obj["bytes"]),
                    inst_bps=float(obj["inst_bps"]),
                    cum_avg_bps=float(obj["cum_avg_bps"]),
                ))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"line {lineno}: bad sample object: {exc}") from None
    return samples, summary
