"""Thin HTTP client for the tuning service.

With no server URL the bundled FastAPI app is driven in-process through an
ASGI transport — same routes, same schemas, no socket.  With a URL the same
requests go over the wire, so the CLI can interrogate a remote node's agent
(whose probe, bench, and sysctl snapshots then describe *that* node).
"""

from __future__ import annotations

import asyncio
from typing import Any

import httpx


class ApiError(Exception):
    """A non-2xx service response."""

    def __init__(self, status_code: int, detail: Any):
        self.status_code = status_code
        self.detail = detail
        super().__init__(self._render())

    def _render(self) -> str:
        if isinstance(self.detail, dict) and "message" in self.detail:
            return str(self.detail["message"])
        return f"service error {self.status_code}: {self.detail}"


class ApiClient:
    """Issues requests against the bundled app or a remote service."""

    def __init__(self, server_url: str | None = None, timeout_s: float = 30.0):
        self.server_url = server_url.rstrip("/") if server_url else None
        self.timeout_s = timeout_s

    def _transport(self) -> tuple[httpx.AsyncBaseTransport | None, str]:
        if self.server_url is None:
            from .service.app import app

            return httpx.ASGITransport(app=app), "http://bdptune.local"
        return None, self.server_url

    async def _request_async(self, method: str, path: str, json_body: Any,
                             params: dict | None, timeout_s: float) -> Any:
        transport, base_url = self._transport()
        async with httpx.AsyncClient(
            transport=transport, base_url=base_url, timeout=timeout_s
        ) as client:
            response = await client.request(method, path, json=json_body, params=params)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            raise ApiError(response.status_code, detail)
        return response.json()

    def request(self, method: str, path: str, json_body: Any = None,
                params: dict | None = None, timeout_s: float | None = None) -> Any:
        timeout = self.timeout_s if timeout_s is None else timeout_s
        return asyncio.run(self._request_async(method, path, json_body, params, timeout))

    def get(self, path: str, params: dict | None = None,
            timeout_s: float | None = None) -> Any:
        return self.request("GET", path, params=params, timeout_s=timeout_s)

    def post(self, path: str, json_body: Any, timeout_s: float | None = None) -> Any:
        return self.request("POST", path, json_body=json_body, timeout_s=timeout_s)
