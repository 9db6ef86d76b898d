"""Request/response models for the tuning service.

These mirror the core dataclasses at the HTTP boundary; each request model
knows how to resolve itself into core types.  A link may be given either as a
named preset (with an optional RTT override, mandatory for ``home-dsl``) or as
explicit capacity/RTT numbers.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from .. import bench, model


class LinkIn(BaseModel):
    preset: str | None = None
    capacity_bps: float | None = Field(default=None, gt=0)
    base_rtt_s: float | None = Field(default=None, ge=0)
    loss_rate: float = Field(default=0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_source(self) -> "LinkIn":
        if self.preset is None:
            if self.capacity_bps is None or self.base_rtt_s is None:
                raise ValueError("give either a preset or both capacity_bps and base_rtt_s")
        elif self.preset not in model.PRESET_NAMES:
            raise ValueError(
                f"unknown preset {self.preset!r}; choose from {', '.join(model.PRESET_NAMES)}"
            )
        return self

    def resolve(self) -> model.LinkSpec:
        if self.preset is not None:
            return model.get_preset(self.preset, rtt_s=self.base_rtt_s, loss_rate=self.loss_rate).link
        return model.LinkSpec(self.capacity_bps, self.base_rtt_s, self.loss_rate)


class TripleIn(BaseModel):
    min: int = Field(gt=0)
    default: int = Field(gt=0)
    max: int = Field(gt=0)

    @model_validator(mode="after")
    def _check_order(self) -> "TripleIn":
        if not self.min <= self.default <= self.max:
            raise ValueError("triple must satisfy min <= default <= max")
        return self

    def resolve(self) -> model.BufferTriple:
        return model.BufferTriple(self.min, self.default, self.max)

    @classmethod
    def from_core(cls, t: model.BufferTriple) -> "TripleIn":
        return cls(min=t.min, default=t.default, max=t.max)


def _default_triple() -> TripleIn:
    return TripleIn.from_core(model.KERNEL_DEFAULT_TCP.rmem)


class TcpIn(BaseModel):
    rmem: TripleIn = Field(default_factory=_default_triple)
    wmem: TripleIn = Field(default_factory=_default_triple)
    rmem_max: int = Field(default=model.KERNEL_DEFAULT_TCP.rmem_max, gt=0)
    wmem_max: int = Field(default=model.KERNEL_DEFAULT_TCP.wmem_max, gt=0)
    sack_enabled: bool = True
    moderate_rcvbuf: bool = True

    def resolve(self) -> model.TcpBufferConfig:
        return model.TcpBufferConfig(
            rmem=self.rmem.resolve(),
            wmem=self.wmem.resolve(),
            rmem_max=self.rmem_max,
            wmem_max=self.wmem_max,
            sack_enabled=self.sack_enabled,
            moderate_rcvbuf=self.moderate_rcvbuf,
        )

    @classmethod
    def from_core(cls, c: model.TcpBufferConfig) -> "TcpIn":
        return cls(
            rmem=TripleIn.from_core(c.rmem),
            wmem=TripleIn.from_core(c.wmem),
            rmem_max=c.rmem_max,
            wmem_max=c.wmem_max,
            sack_enabled=c.sack_enabled,
            moderate_rcvbuf=c.moderate_rcvbuf,
        )


class NicIn(BaseModel):
    mtu_bytes: int = Field(default=model.DEFAULT_MTU_BYTES, gt=40)
    txqueuelen_packets: int = Field(default=model.DEFAULT_TXQUEUELEN, ge=1)

    def resolve(self) -> model.NicConfig:
        return model.NicConfig(self.mtu_bytes, self.txqueuelen_packets)


class ParamsIn(BaseModel):
    header_overhead_bytes: int = Field(default=40, ge=0)
    framing_overhead_bytes: int = Field(default=38, ge=0)
    window_fraction: float = Field(default=1.0, gt=0, le=1)
    overflow_loss_coeff: float = Field(default=0.02, ge=0, le=1)
    overflow_decay: float = Field(default=0.5, gt=0)
    background_loss_rate: float = Field(default=1e-7, ge=0, le=1)
    loss_threshold: float = Field(default=1e-4, ge=0, le=1)
    jumbo_mtu_bytes: int = Field(default=9000, gt=40)

    def resolve(self) -> model.ModelParams:
        return model.ModelParams(**self.model_dump())


class BdpRequest(BaseModel):
    link: LinkIn


class BdpResponse(BaseModel):
    capacity_bps: float
    base_rtt_s: float
    bdp_bits: float
    display: str


class RecommendationOut(BaseModel):
    key: str
    current: str
    recommended: str
    rationale: str
    changed: bool

    @classmethod
    def from_core(cls, r: model.Recommendation) -> "RecommendationOut":
        return cls(key=r.key, current=r.current, recommended=r.recommended,
                   rationale=r.rationale, changed=r.changed)


class AdviseRequest(BaseModel):
    link: LinkIn
    tcp: TcpIn | None = None
    nic: NicIn = Field(default_factory=NicIn)
    params: ParamsIn = Field(default_factory=ParamsIn)
    headroom: float = Field(default=2.0, ge=1.0)
    sysctl_root: str | None = None
    iface: str | None = None


class AdviseResponse(BaseModel):
    bdp_bits: float
    bdp_display: str
    headroom: float
    recommendations: list[RecommendationOut]
    sysctl_conf: str
    link_commands: list[str]


class SimulateRequest(BaseModel):
    link: LinkIn
    tcp: TcpIn | None = None
    buffer_bytes: int | None = Field(default=None, gt=0)
    nic: NicIn = Field(default_factory=NicIn)
    params: ParamsIn = Field(default_factory=ParamsIn)


class PointOut(BaseModel):
    x: float
    throughput_bps: float
    limiting_factor: str


class SweepRequest(BaseModel):
    kind: str
    link: LinkIn
    values: list[float] = Field(min_length=1)
    tcp: TcpIn | None = None
    buffer_bytes: int | None = Field(default=None, gt=0)
    nic: NicIn = Field(default_factory=NicIn)
    params: ParamsIn = Field(default_factory=ParamsIn)

    @model_validator(mode="after")
    def _check_kind(self) -> "SweepRequest":
        if self.kind not in ("buffer", "mtu", "queue"):
            raise ValueError("kind must be one of: buffer, mtu, queue")
        return self


class SweepResponse(BaseModel):
    kind: str
    points: list[PointOut]


class SnapshotResponse(BaseModel):
    root: str
    read_time: float
    values: dict[str, str]
    config: TcpIn


class ProbeRequest(BaseModel):
    host: str
    port: int = Field(default=443, ge=1, le=65535)
    samples: int = Field(default=11, ge=1)
    timeout_s: float = Field(default=2.0, gt=0)
    spacing_s: float = Field(default=0.1, ge=0)


class ProbeResponse(BaseModel):
    host: str
    port: int
    samples_s: list[float]
    min_s: float
    median_s: float
    mean_s: float
    stddev_s: float
    failures: int


class BenchRunRequest(BaseModel):
    host: str
    port: int = Field(default=bench.DEFAULT_BENCH_PORT, ge=1, le=65535)
    duration_s: float = Field(default=10.0, ge=1)
    sndbuf_bytes: int | None = Field(default=None, gt=0)
    payload_pattern: str = "zeros"
    seed: int | None = None

    @model_validator(mode="after")
    def _check_pattern(self) -> "BenchRunRequest":
        if self.payload_pattern not in bench.PAYLOAD_PATTERNS:
            raise ValueError(f"payload_pattern must be one of {bench.PAYLOAD_PATTERNS}")
        return self


class SampleOut(BaseModel):
    t: int
    bytes: int
    inst_bps: float
    cum_avg_bps: float


class SummaryOut(BaseModel):
    total_bytes: int
    elapsed_s: float
    mean_inst_bps: float
    min_inst_bps: float
    max_inst_bps: float
    final_cum_avg_bps: float


class BenchRunResponse(BaseModel):
    side: str
    samples: list[SampleOut]
    summary: SummaryOut | None
    truncated: bool
    effective_sndbuf_bytes: int | None


class PresetOut(BaseModel):
    name: str
    capacity_bps: float
    base_rtt_s: float | None
    rtt_required: bool


class HealthResponse(BaseModel):
    status: str
    version: str
