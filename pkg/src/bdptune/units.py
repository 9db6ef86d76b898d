"""Parsing and formatting of rates, byte sizes, and time durations.

Conventions: decimal prefixes (K/M/G/T) scale by powers of 1000 and apply to
rates and bit quantities; binary prefixes (Ki/Mi/Gi/Ti) scale by powers of 1024
and apply to byte sizes only.  Parsers accept plain numbers (including
scientific notation) with an optional suffix.
"""

from __future__ import annotations

import re

_DECIMAL = {"": 1, "K": 10**3, "M": 10**6, "G": 10**9, "T": 10**12}
_BINARY = {"Ki": 2**10, "Mi": 2**20, "Gi": 2**30, "Ti": 2**40}

_RATE_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*([KMGT]?)(?:bps|bit/s)?\s*$")
_BYTES_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*([KMGT]i?|)(?:B)?\s*$")
_TIME_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*(us|ms|s|)\s*$")

_TIME_SCALE = {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6}


def parse_rate(text: str) -> float:
    """Parse a link rate in bits per second, e.g. '1e9', '10G', '501Mbps'."""
    m = _RATE_RE.match(text)
    if not m:
        raise ValueError(f"malformed rate: {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ValueError(f"malformed rate: {text!r}") from None
    rate = value * _DECIMAL[m.group(2)]
    if rate <= 0:
        raise ValueError(f"rate must be positive: {text!r}")
    return rate


def parse_bytes(text: str) -> int:
    """Parse a byte size, e.g. '4096', '256M' (decimal), '16Mi' (binary).

    Fractions are allowed with a suffix ('1.5Mi') and round to the nearest
    whole byte.
    """
    m = _BYTES_RE.match(text)
    if not m:
        raise ValueError(f"malformed byte size: {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ValueError(f"malformed byte size: {text!r}") from None
    suffix = m.group(2)
    scale = _BINARY[suffix] if suffix in _BINARY else _DECIMAL[suffix]
    nbytes = round(value * scale)
    if nbytes < 0:
        raise ValueError(f"byte size must be non-negative: {text!r}")
    return int(nbytes)


def parse_time(text: str) -> float:
    """Parse a duration in seconds, e.g. '0.12ms', '1.58ms', '150us', '2'."""
    m = _TIME_RE.match(text)
    if not m:
        raise ValueError(f"malformed duration: {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ValueError(f"malformed duration: {text!r}") from None
    seconds = value * _TIME_SCALE[m.group(2)]
    if seconds < 0:
        raise ValueError(f"duration must be non-negative: {text!r}")
    return seconds


def format_bits(bits: float, digits: int = 3) -> str:
    """Render a bit quantity with a decimal prefix, e.g. 120000 -> '120 Kbit'."""
    return _format_decimal(bits, "bit", digits)


def format_rate(bps: float, digits: int = 4) -> str:
    """Render a rate with a decimal prefix, e.g. 442430379.7 -> '442.4 Mbps'."""
    return _format_decimal(bps, "bps", digits)


def _format_decimal(value: float, unit: str, digits: int) -> str:
    for prefix, scale in (("T", 10**12), ("G", 10**9), ("M", 10**6), ("K", 10**3)):
        if abs(value) >= scale:
            return f"{value / scale:.{digits}g} {prefix}{unit}"
    return f"{value:.{digits}g} {unit}"


def format_bytes(nbytes: int) -> str:
    """Render a byte count with thousands separators, e.g. '3,952,640 B'."""
    return f"{nbytes:,} B"
