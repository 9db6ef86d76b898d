"""Round-trip time measurement over TCP handshakes.

Each sample times a full ``connect()`` (SYN / SYN-ACK / ACK) and closes the
socket immediately; no application payload is ever sent, so any TCP listener
is a valid target.  The median is the headline estimator — handshake timings
are right-skewed by scheduler noise and the median shrugs off outliers.
"""

from __future__ import annotations

import socket
import statistics
import time
from dataclasses import dataclass


class ProbeError(Exception):
    """Base class for probe failures."""


class NameResolutionError(ProbeError):
    """The host name did not resolve."""


class UnreachableHostError(ProbeError):
    """Every connection attempt failed."""

    def __init__(self, host: str, port: int, failures: int):
        super().__init__(f"no TCP handshake completed to {host}:{port} in {failures} attempts")
        self.host = host
        self.port = port
        self.failures = failures


@dataclass(frozen=True)
class RttReport:
    """Summary statistics over successful handshake timings, in seconds."""

    samples: tuple[float, ...]
    min_s: float
    median_s: float
    mean_s: float
    stddev_s: float
    failures: int

    @classmethod
    def from_samples(cls, samples: list[float], failures: int = 0) -> "RttReport":
        if not samples:
            raise ValueError("at least one successful sample is required")
        if any(s < 0 for s in samples):
            raise ValueError("samples must be non-negative")
        return cls(
            samples=tuple(samples),
            min_s=min(samples),
            median_s=statistics.median(samples),
            mean_s=statistics.fmean(samples),
            stddev_s=statistics.pstdev(samples),
            failures=failures,
        )


def measure_rtt(
    host: str,
    port: int,
    samples: int = 11,
    timeout_s: float = 2.0,
    spacing_s: float = 0.1,
) -> RttReport:
    """Time ``samples`` sequential TCP handshakes to ``host:port``.

    Attempts are spaced ``spacing_s`` apart so they never overlap.  Failed
    attempts (timeout, refusal) are excluded from statistics and counted in
    ``failures``; if every attempt fails an :class:`UnreachableHostError` is
    raised carrying the attempt count.  Resolution failures raise
    :class:`NameResolutionError` before any connection is attempted.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if timeout_s <= 0:
        raise ValueError(f"timeout_s must be positive, got {timeout_s}")
    if spacing_s < 0:
        raise ValueError(f"spacing_s must be non-negative, got {spacing_s}")

    try:
        infos = socket.getaddrinfo(host, port, type=socket.SOCK_STREAM)
    except socket.gaierror as exc:
        raise NameResolutionError(f"cannot resolve {host!r}: {exc}") from None
    family, socktype, proto, _, sockaddr = infos[0]

    timings: list[float] = []
    failures = 0
    for attempt in range(samples):
        if attempt:
            time.sleep(spacing_s)
        sock = socket.socket(family, socktype, proto)
        sock.settimeout(timeout_s)
        started = time.perf_counter()
        try:
            sock.connect(sockaddr)
        except OSError:
            failures += 1
        else:
            timings.append(time.perf_counter() - started)
        finally:
            sock.close()

    if not timings:
        raise UnreachableHostError(host, port, failures)
    return RttReport.from_samples(timings, failures)
