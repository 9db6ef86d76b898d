"""Reading kernel tunables from a /proc/sys-style tree and emitting config.

The tree root is configurable so tests (and remote snapshots) can point at a
fixture directory instead of the live ``/proc/sys``.  Reads never write;
emitters produce text for the operator to apply.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .model import BufferTriple, NicConfig, Recommendation, TcpBufferConfig

DEFAULT_SYSCTL_ROOT = Path("/proc/sys")


class SysctlParseError(ValueError):
    """A tunable's content did not parse."""


class MissingTunableError(FileNotFoundError):
    """A tunable file was absent under the snapshot root."""


@dataclass(frozen=True)
class TunableKey:
    """One kernel tunable: dotted sysctl name, file path, and value kind."""

    dotted_name: str
    relative_path: str
    kind: str  # "triple" | "scalar" | "boolean"

    def __post_init__(self) -> None:
        if self.dotted_name.replace(".", "/") != self.relative_path:
            raise ValueError(
                f"relative_path {self.relative_path!r} is not the slashed form of {self.dotted_name!r}"
            )
        if self.kind not in ("triple", "scalar", "boolean"):
            raise ValueError(f"unknown tunable kind {self.kind!r}")


TUNABLE_KEYS = (
    TunableKey("net.ipv4.tcp_rmem", "net/ipv4/tcp_rmem", "triple"),
    TunableKey("net.ipv4.tcp_wmem", "net/ipv4/tcp_wmem", "triple"),
    TunableKey("net.core.rmem_max", "net/core/rmem_max", "scalar"),
    TunableKey("net.core.wmem_max", "net/core/wmem_max", "scalar"),
    TunableKey("net.ipv4.tcp_sack", "net/ipv4/tcp_sack", "boolean"),
    TunableKey("net.ipv4.tcp_moderate_rcvbuf", "net/ipv4/tcp_moderate_rcvbuf", "boolean"),
)

SYSCTL_KEY_NAMES = frozenset(k.dotted_name for k in TUNABLE_KEYS)


@dataclass(frozen=True)
class TunableSnapshot:
    """Raw and parsed state of the six tunables under one root."""

    values: dict[str, str]
    config: TcpBufferConfig
    source_root: Path
    read_time: float


def parse_triple(raw: str) -> BufferTriple:
    """Parse 'min default max' separated by runs of spaces or tabs.

    A trailing newline is tolerated.  Errors name the offending token.
    """
    tokens = raw.split()
    if len(tokens) != 3:
        raise SysctlParseError(f"expected 3 integers, got {len(tokens)} in {raw!r}")
    numbers = []
    for token in tokens:
        try:
            value = int(token)
        except ValueError:
            raise SysctlParseError(f"not an integer: {token!r}") from None
        if value < 0:
            raise SysctlParseError(f"negative value: {token!r}")
        numbers.append(value)
    mn, dflt, mx = numbers
    if mn > dflt:
        raise SysctlParseError(f"triple ordering violated (min <= default <= max): {tokens[1]!r}")
    if dflt > mx:
        raise SysctlParseError(f"triple ordering violated (min <= default <= max): {tokens[2]!r}")
    try:
        return BufferTriple(mn, dflt, mx)
    except ValueError as exc:
        raise SysctlParseError(str(exc)) from None


def _parse_scalar(raw: str) -> int:
    tokens = raw.split()
    if len(tokens) != 1:
        raise SysctlParseError(f"expected a single integer, got {raw!r}")
    try:
        value = int(tokens[0])
    except ValueError:
        raise SysctlParseError(f"not an integer: {tokens[0]!r}") from None
    if value < 0:
        raise SysctlParseError(f"negative value: {tokens[0]!r}")
    return value


def _parse_boolean(raw: str) -> bool:
    token = raw.strip()
    if token == "0":
        return False
    if token == "1":
        return True
    raise SysctlParseError(f"boolean tunable must be '0' or '1', got {token!r}")


def read_snapshot(root: str | Path = DEFAULT_SYSCTL_ROOT) -> TunableSnapshot:
    """Read all six tunables under ``root``.

    A missing file raises :class:`MissingTunableError` naming its relative
    path; malformed content raises :class:`SysctlParseError` naming the file.
    """
    root = Path(root)
    raw_values: dict[str, str] = {}
    parsed: dict[str, object] = {}
    for key in TUNABLE_KEYS:
        path = root / key.relative_path
        try:
            raw = path.read_text()
        except FileNotFoundError:
            raise MissingTunableError(f"missing tunable file: {key.relative_path}") from None
        raw_values[key.dotted_name] = raw.strip()
        try:
            if key.kind == "triple":
                parsed[key.dotted_name] = parse_triple(raw)
            elif key.kind == "scalar":
                parsed[key.dotted_name] = _parse_scalar(raw)
            else:
                parsed[key.dotted_name] = _parse_boolean(raw)
        except SysctlParseError as exc:
            raise SysctlParseError(f"{key.relative_path}: {exc}") from None
    try:
        config = TcpBufferConfig(
            rmem=parsed["net.ipv4.tcp_rmem"],
            wmem=parsed["net.ipv4.tcp_wmem"],
            rmem_max=parsed["net.core.rmem_max"],
            wmem_max=parsed["net.core.wmem_max"],
            sack_enabled=parsed["net.ipv4.tcp_sack"],
            moderate_rcvbuf=parsed["net.ipv4.tcp_moderate_rcvbuf"],
        )
    except ValueError as exc:
        raise SysctlParseError(str(exc)) from None
    return TunableSnapshot(values=raw_values, config=config, source_root=root, read_time=time.time())


def config_to_values(config: TcpBufferConfig) -> dict[str, str]:
    """Serialize a config to its six sysctl value strings."""
    return {
        "net.ipv4.tcp_rmem": config.rmem.as_text(),
        "net.ipv4.tcp_wmem": config.wmem.as_text(),
        "net.core.rmem_max": str(config.rmem_max),
        "net.core.wmem_max": str(config.wmem_max),
        "net.ipv4.tcp_sack": "1" if config.sack_enabled else "0",
        "net.ipv4.tcp_moderate_rcvbuf": "1" if config.moderate_rcvbuf else "0",
    }


def values_to_config(values: Mapping[str, str]) -> TcpBufferConfig:
    """Parse six sysctl value strings back into a config."""
    def need(dotted: str) -> str:
        try:
            return values[dotted]
        except KeyError:
            raise SysctlParseError(f"missing key: {dotted}") from None

    return TcpBufferConfig(
        rmem=parse_triple(need("net.ipv4.tcp_rmem")),
        wmem=parse_triple(need("net.ipv4.tcp_wmem")),
        rmem_max=_parse_scalar(need("net.core.rmem_max")),
        wmem_max=_parse_scalar(need("net.core.wmem_max")),
        sack_enabled=_parse_boolean(need("net.ipv4.tcp_sack")),
        moderate_rcvbuf=_parse_boolean(need("net.ipv4.tcp_moderate_rcvbuf")),
    )


def emit_sysctl_conf(recommendations: Iterable[Recommendation]) -> str:
    """Render recommendations as a sysctl.conf snippet.

    Changed keys become active ``key = value`` lines; unchanged keys appear as
    comments for the record.  Keys are sorted; output ends with one newline.
    """
    recs = sorted(recommendations, key=lambda r: r.key)
    if not recs:
        raise ValueError("no recommendations to emit")
    lines = []
    for rec in recs:
        if rec.changed:
            lines.append(f"{rec.key} = {rec.recommended}")
        else:
            lines.append(f"# {rec.key} = {rec.recommended} (unchanged)")
    return "\n".join(lines) + "\n"


def emit_values_conf(values: Mapping[str, str]) -> str:
    """Render a plain key = value sysctl.conf snippet, keys sorted."""
    if not values:
        raise ValueError("no values to emit")
    lines = [f"{key} = {values[key]}" for key in sorted(values)]
    return "\n".join(lines) + "\n"


def parse_sysctl_conf(text: str) -> dict[str, str]:
    """Parse sysctl.conf text to a key -> value mapping.

    Blank lines and comment lines are skipped; values keep internal spacing.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith(";"):
            continue
        if "=" not in stripped:
            raise SysctlParseError(f"line {lineno}: no '=' in {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise SysctlParseError(f"line {lineno}: empty key in {line!r}")
        values[key] = value.strip()
    return values


def emit_link_commands(iface: str, nic: NicConfig) -> list[str]:
    """The two ``ip link`` commands that apply a NIC recommendation."""
    if not iface or not iface.strip():
        raise ValueError("interface name must be non-empty")
    iface = iface.strip()
    return [
        f"ip link set dev {iface} mtu {nic.mtu_bytes}",
        f"ip link set dev {iface} txqueuelen {nic.txqueuelen_packets}",
    ]


def split_recommendations(
    recommendations: Iterable[Recommendation],
) -> tuple[list[Recommendation], list[Recommendation]]:
    """Split an advisory into (sysctl-applied, link-applied) recommendations."""
    sysctl_recs, link_recs = [], []
    for rec in recommendations:
        (sysctl_recs if rec.key in SYSCTL_KEY_NAMES else link_recs).append(rec)
    return sysctl_recs, link_recs
