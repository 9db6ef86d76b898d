"""bdptune: TCP buffer, MTU, and queue tuning guided by bandwidth-delay products."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    BdpBits,
    BufferTriple,
    LinkSpec,
    ModelParams,
    NicConfig,
    Recommendation,
    ScenarioPreset,
    TcpBufferConfig,
    advise,
    buffer_bits,
    compute_bdp,
    get_preset,
    needs_tuning,
    protocol_efficiency,
    recommend_buffer,
    recommend_mtu,
    recommend_txqueuelen,
)
from .simulator import ThroughputPoint, simulate_throughput  # noqa: F401
