"""Core types and tuning rules.

The quantities here follow one consistent unit scheme: capacities in bits per
second, delays in seconds, buffer and MTU sizes in bytes, queues in packets.
Bandwidth-delay products are kept in bits because kernel buffer tunables are
byte-valued and the factor of 8 is where sizing mistakes hide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .units import format_bits

#: Byte granularity of kernel socket-buffer accounting; recommended ceilings
#: are rounded up to a multiple of this.
BUFFER_GRANULARITY = 4096

#: Triple minimum pinned by the advisor (the classic kernel floor).
RECOMMENDED_MIN_BYTES = 4096

#: Capacity above which jumbo frames start paying for themselves.
GIGABIT_BPS = 1e9

#: Conventional Ethernet MTU.
DEFAULT_MTU_BYTES = 1500

#: Stock transmit-queue length on Linux NICs.
DEFAULT_TXQUEUELEN = 1000

#: Transmit-queue lengths the advisor chooses between.
TESTED_QUEUE_LENGTHS = (1000, 2000, 4000, 8000)


@dataclass(frozen=True)
class LinkSpec:
    """A network path: capacity, base round-trip time, and stationary loss."""

    capacity_bps: float
    base_rtt_s: float
    loss_rate: float = 0.0

    def __post_init__(self) -> None:
        if not (self.capacity_bps > 0 and math.isfinite(self.capacity_bps)):
            raise ValueError(f"capacity_bps must be positive and finite, got {self.capacity_bps}")
        if not (self.base_rtt_s >= 0 and math.isfinite(self.base_rtt_s)):
            raise ValueError(f"base_rtt_s must be non-negative and finite, got {self.base_rtt_s}")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValueError(f"loss_rate must lie in [0, 1], got {self.loss_rate}")


@dataclass(frozen=True)
class BdpBits:
    """A bandwidth-delay product, in bits."""

    value: float

    def __post_init__(self) -> None:
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError(f"BDP must be non-negative and finite, got {self.value}")

    @property
    def display(self) -> str:
        return format_bits(self.value)


@dataclass(frozen=True)
class BufferTriple:
    """A (min, default, max) socket-buffer triple, in bytes."""

    min: int
    default: int
    max: int

    def __post_init__(self) -> None:
        for name in ("min", "default", "max"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"buffer triple {name} must be a positive integer, got {v!r}")
        if not self.min <= self.default <= self.max:
            raise ValueError(
                f"buffer triple must satisfy min <= default <= max, got "
                f"({self.min}, {self.default}, {self.max})"
            )

    def as_text(self) -> str:
        return f"{self.min} {self.default} {self.max}"


@dataclass(frozen=True)
class TcpBufferConfig:
    """The six buffer-related TCP tunables of interest."""

    rmem: BufferTriple
    wmem: BufferTriple
    rmem_max: int
    wmem_max: int
    sack_enabled: bool = True
    moderate_rcvbuf: bool = True

    def __post_init__(self) -> None:
        for name in ("rmem_max", "wmem_max"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    def effective_window_bytes(self) -> int:
        """The smallest of the four ceilings that can cap a window."""
        return min(self.rmem.max, self.wmem.max, self.rmem_max, self.wmem_max)


@dataclass(frozen=True)
class NicConfig:
    """Interface-level knobs: MTU and transmit-queue length."""

    mtu_bytes: int = DEFAULT_MTU_BYTES
    txqueuelen_packets: int = DEFAULT_TXQUEUELEN

    def __post_init__(self) -> None:
        if not isinstance(self.mtu_bytes, int) or self.mtu_bytes <= 40:
            raise ValueError(f"mtu_bytes must be an integer above 40, got {self.mtu_bytes!r}")
        if not isinstance(self.txqueuelen_packets, int) or self.txqueuelen_packets < 1:
            raise ValueError(f"txqueuelen_packets must be >= 1, got {self.txqueuelen_packets!r}")


@dataclass(frozen=True)
class ModelParams:
    """Every constant of the throughput model, overridable in one place."""

    #: Bytes of IP + TCP header per segment.
    header_overhead_bytes: int = 40
    #: Bytes of framing per packet not counted in the MTU (Ethernet preamble,
    #: header, FCS, inter-frame gap).
    framing_overhead_bytes: int = 38
    #: Fraction of the configured buffer ceiling usable as window.
    window_fraction: float = 1.0
    #: Loss coefficient applied when the sender's excess overflows the queue.
    overflow_loss_coeff: float = 0.02
    #: Queue-capacity scale (in units of BDP) over which overflow loss decays.
    overflow_decay: float = 0.5
    #: Stationary background loss probability.
    background_loss_rate: float = 1e-7
    #: Loss rate above which jumbo frames stop being recommended.
    loss_threshold: float = 1e-4
    #: Jumbo MTU recommended on fast clean links.
    jumbo_mtu_bytes: int = 9000

    def __post_init__(self) -> None:
        if self.header_overhead_bytes < 0 or self.framing_overhead_bytes < 0:
            raise ValueError("overhead byte counts must be non-negative")
        if not 0 < self.window_fraction <= 1:
            raise ValueError(f"window_fraction must lie in (0, 1], got {self.window_fraction}")
        if not 0 <= self.overflow_loss_coeff <= 1:
            raise ValueError(f"overflow_loss_coeff must lie in [0, 1], got {self.overflow_loss_coeff}")
        if self.overflow_decay <= 0:
            raise ValueError(f"overflow_decay must be positive, got {self.overflow_decay}")
        if not 0 <= self.background_loss_rate <= 1:
            raise ValueError(f"background_loss_rate must lie in [0, 1], got {self.background_loss_rate}")
        if not 0 <= self.loss_threshold <= 1:
            raise ValueError(f"loss_threshold must lie in [0, 1], got {self.loss_threshold}")
        if self.jumbo_mtu_bytes <= self.header_overhead_bytes:
            raise ValueError("jumbo_mtu_bytes must exceed header_overhead_bytes")


@dataclass(frozen=True)
class Recommendation:
    """One tunable: current value, recommended value, and why."""

    key: str
    current: str
    recommended: str
    rationale: str
    changed: bool

    def __post_init__(self) -> None:
        if self.changed != (self.current != self.recommended):
            raise ValueError(
                f"changed flag inconsistent for {self.key}: "
                f"current={self.current!r} recommended={self.recommended!r}"
            )

    @classmethod
    def build(cls, key: str, current: str, recommended: str, rationale: str) -> "Recommendation":
        return cls(key, current, recommended, rationale, current != recommended)


@dataclass(frozen=True)
class ScenarioPreset:
    """A named link scenario usable from the CLI and the service."""

    name: str
    link: LinkSpec


#: Classic kernel defaults for the six tunables (tcp_rmem/tcp_wmem triples of
#: 4096/16384/87380 plus the stock core ceilings).
KERNEL_DEFAULT_TCP = TcpBufferConfig(
    rmem=BufferTriple(4096, 16384, 87380),
    wmem=BufferTriple(4096, 16384, 87380),
    rmem_max=212992,
    wmem_max=212992,
    sack_enabled=True,
    moderate_rcvbuf=True,
)

KERNEL_DEFAULT_NIC = NicConfig()

#: Preset capacities; home-dsl carries no RTT and requires a caller-supplied one.
PRESET_NAMES = ("home-lan", "home-dsl", "dc-1g", "dc-10g")

_PRESET_LINKS = {
    "home-lan": (1e9, 0.12e-3),
    "home-dsl": (1e7, None),
    "dc-1g": (1e9, 1.49e-3),
    "dc-10g": (1e10, 1.58e-3),
}


def preset_catalog() -> dict[str, tuple[float, float | None]]:
    """Preset name -> (capacity_bps, base_rtt_s or None when caller-supplied)."""
    return dict(_PRESET_LINKS)


def get_preset(name: str, rtt_s: float | None = None, loss_rate: float = 0.0) -> ScenarioPreset:
    """Resolve a preset name to a concrete link.

    ``rtt_s`` overrides the preset RTT and is mandatory for ``home-dsl``,
    which has no canonical one.
    """
    try:
        capacity, preset_rtt = _PRESET_LINKS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    rtt = rtt_s if rtt_s is not None else preset_rtt
    if rtt is None:
        raise ValueError(f"preset {name!r} needs an explicit round-trip time")
    return ScenarioPreset(name=name, link=LinkSpec(capacity, rtt, loss_rate))


def compute_bdp(link: LinkSpec) -> BdpBits:
    """Bandwidth-delay product in bits: capacity times base RTT."""
    return BdpBits(link.capacity_bps * link.base_rtt_s)


def buffer_bits(buffer_bytes: int) -> float:
    """A byte-valued buffer expressed in bits."""
    if buffer_bytes < 0:
        raise ValueError(f"buffer_bytes must be non-negative, got {buffer_bytes}")
    return float(buffer_bytes * 8)


def needs_tuning(buffer_bytes: int, bdp: BdpBits) -> bool:
    """True when the buffer cannot hold one bandwidth-delay product.

    Strict comparison: a buffer exactly equal to the BDP is sufficient.
    """
    return buffer_bits(buffer_bytes) < bdp.value


def _round_up_to_granularity(nbytes: int) -> int:
    return ((nbytes + BUFFER_GRANULARITY - 1) // BUFFER_GRANULARITY) * BUFFER_GRANULARITY


def buffer_target_bytes(bdp: BdpBits, headroom: float) -> int:
    """The byte ceiling needed for ``headroom`` windows of ``bdp`` bits."""
    if headroom < 1.0:
        raise ValueError(f"headroom must be >= 1, got {headroom}")
    return _round_up_to_granularity(math.ceil(headroom * bdp.value / 8))


def recommend_buffer(bdp: BdpBits, headroom: float, current: TcpBufferConfig) -> TcpBufferConfig:
    """Raise buffer ceilings to hold ``headroom`` x BDP; never lower anything.

    Triple defaults stay untouched (connection start-up behavior is not the
    bottleneck being fixed); triple minimums are pinned at 4096 bytes; SACK and
    receive-buffer moderation come back enabled.
    """
    target = buffer_target_bytes(bdp, headroom)

    def lifted(triple: BufferTriple) -> BufferTriple:
        return BufferTriple(
            min=min(RECOMMENDED_MIN_BYTES, triple.default),
            default=triple.default,
            max=max(triple.max, target),
        )

    return TcpBufferConfig(
        rmem=lifted(current.rmem),
        wmem=lifted(current.wmem),
        rmem_max=max(current.rmem_max, target),
        wmem_max=max(current.wmem_max, target),
        sack_enabled=True,
        moderate_rcvbuf=True,
    )


def protocol_efficiency(mtu_bytes: int, params: ModelParams = ModelParams()) -> float:
    """Goodput fraction of line rate for a given MTU.

    Each on-wire packet carries ``mtu - header`` payload bytes and occupies
    ``mtu + framing`` bytes of line time.
    """
    if mtu_bytes <= params.header_overhead_bytes:
        raise ValueError(
            f"mtu_bytes must exceed the {params.header_overhead_bytes}-byte header overhead, "
            f"got {mtu_bytes}"
        )
    return (mtu_bytes - params.header_overhead_bytes) / (mtu_bytes + params.framing_overhead_bytes)


def recommend_mtu(link: LinkSpec, params: ModelParams = ModelParams()) -> int:
    """Jumbo frames on fast, clean links; conventional 1500 otherwise."""
    if link.capacity_bps > GIGABIT_BPS and link.loss_rate <= params.loss_threshold:
        return params.jumbo_mtu_bytes
    return DEFAULT_MTU_BYTES


def recommend_txqueuelen(link: LinkSpec, nic: NicConfig) -> int:
    """Transmit-queue length scaled to link rate.

    1000 packets up to gigabit, 8000 at ten gigabit and beyond; linear in
    capacity between, snapped to the nearest tested length (ties downward).
    The current NIC config is accepted for signature symmetry with the other
    recommenders; the choice depends only on the link.
    """
    del nic
    low_bps, high_bps = GIGABIT_BPS, 10 * GIGABIT_BPS
    low_q, high_q = TESTED_QUEUE_LENGTHS[0], TESTED_QUEUE_LENGTHS[-1]
    if link.capacity_bps <= low_bps:
        return low_q
    if link.capacity_bps >= high_bps:
        return high_q
    exact = low_q + (link.capacity_bps - low_bps) * (high_q - low_q) / (high_bps - low_bps)
    return min(TESTED_QUEUE_LENGTHS, key=lambda q: (abs(q - exact), q))


def advise(
    link: LinkSpec,
    tcp: TcpBufferConfig,
    nic: NicConfig,
    params: ModelParams = ModelParams(),
    headroom: float = 2.0,
) -> list[Recommendation]:
    """Full advisory: eight recommendations covering buffers, SACK,
    receive-buffer moderation, MTU, and transmit-queue length."""
    bdp = compute_bdp(link)
    target = buffer_target_bytes(bdp, headroom)
    tuned = recommend_buffer(bdp, headroom, tcp)
    mtu = recommend_mtu(link, params)
    qlen = recommend_txqueuelen(link, nic)

    buffer_why = (
        f"BDP is {bdp.display} ({bdp.value:,.0f} bits); ceilings must hold "
        f"{headroom:g}x BDP = {target:,} B (rounded up to {BUFFER_GRANULARITY}-byte granularity)"
    )
    if mtu > DEFAULT_MTU_BYTES:
        mtu_why = (
            f"capacity {link.capacity_bps:,.0f} bps exceeds 1 Gbps and loss "
            f"{link.loss_rate:g} is within the {params.loss_threshold:g} threshold; "
            f"jumbo frames cut per-packet overhead"
        )
    else:
        mtu_why = (
            f"capacity {link.capacity_bps:,.0f} bps at or below 1 Gbps, or loss "
            f"{link.loss_rate:g} above the {params.loss_threshold:g} threshold; "
            f"conventional frames keep loss recovery cheap"
        )
    qlen_why = (
        f"transmit queue sized to capacity {link.capacity_bps:,.0f} bps so bursts of "
        f"a full window (BDP {bdp.display}) are not dropped at the NIC"
    )

    def onoff(flag: bool) -> str:
        return "1" if flag else "0"

    return [
        Recommendation.build("net.ipv4.tcp_rmem", tcp.rmem.as_text(), tuned.rmem.as_text(), buffer_why),
        Recommendation.build("net.ipv4.tcp_wmem", tcp.wmem.as_text(), tuned.wmem.as_text(), buffer_why),
        Recommendation.build("net.core.rmem_max", str(tcp.rmem_max), str(tuned.rmem_max), buffer_why),
        Recommendation.build("net.core.wmem_max", str(tcp.wmem_max), str(tuned.wmem_max), buffer_why),
        Recommendation.build(
            "net.ipv4.tcp_sack", onoff(tcp.sack_enabled), "1",
            "selective acknowledgements recover multi-segment losses in one round trip",
        ),
        Recommendation.build(
            "net.ipv4.tcp_moderate_rcvbuf", onoff(tcp.moderate_rcvbuf), "1",
            "receive autotuning grows windows toward the raised ceilings on demand",
        ),
        Recommendation.build("mtu", str(nic.mtu_bytes), str(mtu), mtu_why),
        Recommendation.build("txqueuelen", str(nic.txqueuelen_packets), str(qlen), qlen_why),
    ]


def params_from_overrides(**overrides: float | int) -> ModelParams:
    """Build ModelParams from keyword overrides, ignoring ``None`` values."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    valid = {f.name for f in fields(ModelParams)}
    unknown = set(clean) - valid
    if unknown:
        raise ValueError(f"unknown model parameters: {sorted(unknown)}")
    return ModelParams(**clean)
