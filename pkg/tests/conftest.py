"""Shared fixtures: sysctl fixture trees and loopback listeners."""

from __future__ import annotations

import socket
import threading
from pathlib import Path

import pytest

from bdptune.model import TcpBufferConfig
from bdptune.sysctl import config_to_values

#: Relative file path per dotted tunable name, mirroring /proc/sys.
_TREE_PATHS = {
    "net.ipv4.tcp_rmem": "net/ipv4/tcp_rmem",
    "net.ipv4.tcp_wmem": "net/ipv4/tcp_wmem",
    "net.core.rmem_max": "net/core/rmem_max",
    "net.core.wmem_max": "net/core/wmem_max",
    "net.ipv4.tcp_sack": "net/ipv4/tcp_sack",
    "net.ipv4.tcp_moderate_rcvbuf": "net/ipv4/tcp_moderate_rcvbuf",
}


def write_sysctl_tree(root: Path, config: TcpBufferConfig, *, sep: str = "\t") -> Path:
    """Materialize a /proc/sys-style tree for ``config`` under ``root``.

    Triples are written tab-separated with a trailing newline, the way the
    kernel renders them.
    """
    values = config_to_values(config)
    for dotted, rel in _TREE_PATHS.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(values[dotted].replace(" ", sep) + "\n")
    return root


@pytest.fixture
def kernel_tree(tmp_path: Path) -> Path:
    """A fixture tree carrying the classic kernel defaults."""
    from bdptune.model import KERNEL_DEFAULT_TCP

    return write_sysctl_tree(tmp_path / "sys", KERNEL_DEFAULT_TCP)


@pytest.fixture
def tcp_listener():
    """A loopback TCP listener that accepts and immediately closes connections."""
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    server.bind(("127.0.0.1", 0))
    server.listen(32)
    stop = threading.Event()

    def acceptor():
        while not stop.is_set():
            try:
                conn, _ = server.accept()
            except OSError:
                return
            conn.close()

    thread = threading.Thread(target=acceptor, daemon=True)
    thread.start()
    yield ("127.0.0.1", server.getsockname()[1])
    stop.set()
    server.close()
    thread.join(timeout=2)
