"""Loopback stub HTTP server doubling as webhook and distribution endpoint.

Records every request for assertions (also exposed over ``GET /requests``)
and supports scripted failure sequences on ``/upload``, e.g.
``server.script_upload([500, 500, 200])`` to exercise retry behaviour.
"""

from __future__ import annotations

import base64
import json
import threading
from collections import deque
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


@dataclass
class RecordedRequest:
    method: str
    path: str
    headers: dict[str, str]
    body: bytes

    def json(self) -> dict:
        return json.loads(self.body.decode("utf-8"))


class StubServer:
    """``with StubServer() as stub: ...``; bind with port=0 for an ephemeral port."""

    def __init__(self, port: int = 0):
        self.requests: list[RecordedRequest] = []
        self._upload_script: deque[int] = deque()
        self._mutex = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt: str, *args: object) -> None:
                pass

            def _read_body(self) -> bytes:
                length = int(self.headers.get("Content-Length") or 0)
                return self.rfile.read(length) if length else b""

            def _record(self, body: bytes) -> None:
                with stub._mutex:
                    stub.requests.append(
                        RecordedRequest(
                            method=self.command,
                            path=self.path,
                            headers={k: v for k, v in self.headers.items()},
                            body=body,
                        )
                    )

            def _respond(self, code: int, payload: dict | None = None) -> None:
                body = json.dumps(payload or {}).encode()
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self) -> None:
                body = self._read_body()
                self._record(body)
                if self.path == "/webhook":
                    self._respond(200, {"ok": True})
                elif self.path == "/upload":
                    with stub._mutex:
                        code = (
                            stub._upload_script.popleft()
                            if stub._upload_script
                            else 200
                        )
                        serial = len(
                            [r for r in stub.requests if r.path == "/upload"]
                        )
                    if 200 <= code < 300:
                        self._respond(
                            code, {"download_url": stub.url(f"/d/{serial}")}
                        )
                    else:
                        self._respond(code, {"error": f"scripted {code}"})
                else:
                    self._respond(404, {"error": "unknown path"})

            def do_GET(self) -> None:
                self._record(b"")
                if self.path == "/requests":
                    with stub._mutex:
                        listing = [
                            {
                                "method": r.method,
                                "path": r.path,
                                "headers": r.headers,
                                "body_b64": base64.b64encode(r.body).decode(),
                            }
                            for r in stub.requests
                        ]
                    body = json.dumps(listing).encode()
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                elif self.path.startswith("/d/"):
                    self._respond(200, {"artifact": self.path})
                else:
                    self._respond(404, {"error": "unknown path"})

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(
            target=self._server.serve_forever, daemon=True
        )
        self._thread.start()

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def url(self, path: str = "/") -> str:
        return f"http://127.0.0.1:{self.port}{path}"

    @property
    def webhook_url(self) -> str:
        return self.url("/webhook")

    @property
    def upload_url(self) -> str:
        return self.url("/upload")

    def script_upload(self, codes: list[int]) -> None:
        """Queue response codes for the next /upload requests; then 200s."""
        with self._mutex:
            self._upload_script.extend(codes)

    def requests_for(self, path: str) -> list[RecordedRequest]:
        with self._mutex:
            return [r for r in self.requests if r.path == path]

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "StubServer":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
