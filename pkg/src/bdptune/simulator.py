"""Flow-level steady-state TCP throughput model and parameter sweeps.

A single long-lived flow is modeled as the minimum of three limits:

* a window limit — the usable buffer ceiling divided by the effective RTT;
* a capacity limit — line rate scaled by per-packet protocol efficiency;
* a loss limit — the classic ``MSS/RTT x sqrt(3/2p)`` response to loss.

The effective RTT includes standing-queue delay when the window overruns the
path's bandwidth-delay product, and loss picks up an overflow component when
the overrun also exceeds what the transmit queue can absorb.  The overflow
component decays exponentially with queue capacity measured in units of the
BDP: short queues drop bursts readily, queues of a few BDPs absorb them.
Every constant lives in :class:`ModelParams`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (
    BufferTriple,
    LinkSpec,
    ModelParams,
    NicConfig,
    TcpBufferConfig,
    protocol_efficiency,
)

__all__ = [
    "ModelParams",
    "ThroughputPoint",
    "SWEEP_CSV_HEADER",
    "simulate_throughput",
    "sweep_buffer",
    "sweep_mtu",
    "sweep_queue",
    "uniform_buffer_config",
    "points_to_csv",
    "points_to_json",
]

#: Effective RTT never drops below this, so zero-RTT links stay finite.
RTT_FLOOR_S = 1e-6

SWEEP_CSV_HEADER = "x,throughput_bps,limiting_factor"

LIMITING_FACTORS = ("window", "capacity", "loss")


@dataclass(frozen=True)
class ThroughputPoint:
    """One model evaluation: swept value, throughput, and the binding limit."""

    x: float
    throughput_bps: float
    limiting_factor: str

    def __post_init__(self) -> None:
        if self.limiting_factor not in LIMITING_FACTORS:
            raise ValueError(f"limiting_factor must be one of {LIMITING_FACTORS}")
        if not (self.throughput_bps >= 0 and math.isfinite(self.throughput_bps)):
            raise ValueError(f"throughput_bps must be non-negative and finite, got {self.throughput_bps}")


def _evaluate(
    link: LinkSpec, tcp: TcpBufferConfig, nic: NicConfig, params: ModelParams
) -> tuple[float, str]:
    efficiency = protocol_efficiency(nic.mtu_bytes, params)
    mss_bits = 8.0 * (nic.mtu_bytes - params.header_overhead_bytes)

    window_bits = 8.0 * params.window_fraction * tcp.effective_window_bytes()
    bdp_bits = link.capacity_bps * link.base_rtt_s
    excess_bits = max(0.0, window_bits - bdp_bits)
    queue_cap_bits = 8.0 * nic.txqueuelen_packets * nic.mtu_bytes

    # Standing queue: the overrun sits in the transmit queue up to its capacity
    # and inflates the RTT by its drain time.
    standing_bits = min(excess_bits, queue_cap_bits)
    rtt_eff = max(link.base_rtt_s + standing_bits / link.capacity_bps, RTT_FLOOR_S)

    if excess_bits > queue_cap_bits and bdp_bits > 0:
        overflow_loss = params.overflow_loss_coeff * math.exp(
            -queue_cap_bits / (params.overflow_decay * bdp_bits)
        )
    else:
        # No overrun past the queue, or a zero-BDP path where any queue
        # absorbs the burst: no overflow component.
        overflow_loss = 0.0
    loss = min(1.0, params.background_loss_rate + overflow_loss + link.loss_rate)

    window_limit = window_bits / rtt_eff
    capacity_limit = link.capacity_bps * efficiency
    loss_limit = (mss_bits / rtt_eff) * math.sqrt(1.5 / loss) if loss > 0 else math.inf

    throughput = min(window_limit, capacity_limit, loss_limit)
    if throughput == window_limit:
        factor = "window"
    elif throughput == capacity_limit:
        factor = "capacity"
    else:
        factor = "loss"
    return throughput, factor


def simulate_throughput(
    link: LinkSpec,
    tcp: TcpBufferConfig,
    nic: NicConfig,
    params: ModelParams = ModelParams(),
) -> ThroughputPoint:
    """Evaluate the model once.

    ``x`` on the returned point is the effective window ceiling in bytes (the
    smallest of the four buffer maxima) — the quantity a buffer sweep varies.
    """
    throughput, factor = _evaluate(link, tcp, nic, params)
    return ThroughputPoint(
        x=float(tcp.effective_window_bytes()), throughput_bps=throughput, limiting_factor=factor
    )


def uniform_buffer_config(max_bytes: int) -> TcpBufferConfig:
    """A buffer config whose four ceilings all equal ``max_bytes``.

    Triple minimum and default are clamped down when the ceiling sits below
    the usual 4096/16384 so ordering always holds.
    """
    if max_bytes <= 0:
        raise ValueError(f"buffer size must be positive, got {max_bytes}")
    triple = BufferTriple(min(4096, max_bytes), min(16384, max_bytes), max_bytes)
    return TcpBufferConfig(rmem=triple, wmem=triple, rmem_max=max_bytes, wmem_max=max_bytes)


def _check_values(values: Sequence[float], what: str) -> None:
    if not values:
        raise ValueError(f"{what} sweep needs at least one value")


def sweep_buffer(
    link: LinkSpec,
    nic: NicConfig,
    params: ModelParams,
    buffer_values: Sequence[int],
) -> list[ThroughputPoint]:
    """Sweep the common buffer ceiling across ``buffer_values`` (bytes)."""
    _check_values(buffer_values, "buffer")
    points = []
    for nbytes in buffer_values:
        throughput, factor = _evaluate(link, uniform_buffer_config(int(nbytes)), nic, params)
        points.append(ThroughputPoint(float(nbytes), throughput, factor))
    return points


def sweep_mtu(
    link: LinkSpec,
    tcp: TcpBufferConfig,
    params: ModelParams,
    mtu_values: Sequence[int],
    txqueuelen_packets: int,
) -> list[ThroughputPoint]:
    """Sweep the MTU across ``mtu_values`` (bytes) at a fixed queue length."""
    _check_values(mtu_values, "mtu")
    points = []
    for mtu in mtu_values:
        nic = NicConfig(mtu_bytes=int(mtu), txqueuelen_packets=txqueuelen_packets)
        throughput, factor = _evaluate(link, tcp, nic, params)
        points.append(ThroughputPoint(float(mtu), throughput, factor))
    return points


def sweep_queue(
    link: LinkSpec,
    tcp: TcpBufferConfig,
    params: ModelParams,
    queue_values: Sequence[int],
    mtu_bytes: int,
) -> list[ThroughputPoint]:
    """Sweep the transmit-queue length across ``queue_values`` (packets)."""
    _check_values(queue_values, "queue")
    points = []
    for qlen in queue_values:
        nic = NicConfig(mtu_bytes=mtu_bytes, txqueuelen_packets=int(qlen))
        throughput, factor = _evaluate(link, tcp, nic, params)
        points.append(ThroughputPoint(float(qlen), throughput, factor))
    return points


def _format_x(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def points_to_csv(points: Iterable[ThroughputPoint]) -> str:
    """Serialize points as CSV with header ``x,throughput_bps,limiting_factor``.

    Throughput is written with full round-trip precision so downstream plots
    reproduce the model bit for bit.
    """
    lines = [SWEEP_CSV_HEADER]
    for p in points:
        lines.append(f"{_format_x(p.x)},{p.throughput_bps!r},{p.limiting_factor}")
    return "\n".join(lines) + "\n"


def points_to_json(points: Iterable[ThroughputPoint]) -> str:
    """Serialize points as a JSON array of objects."""
    return json.dumps(
        [
            {"x": p.x, "throughput_bps": p.throughput_bps, "limiting_factor": p.limiting_factor}
            for p in points
        ],
        indent=2,
    )
