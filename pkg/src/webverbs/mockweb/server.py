"""HTTP/1.1 JSON facade over a MockWeb.

Routes are ``/{site_id}/{route path}``; GET parameters come from the query
string, POST parameters from a JSON object body.  The ``X-Session`` header
selects the session (default ``default``).
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, unquote, urlsplit

from .world import MockWeb

DEFAULT_PORT = 8642


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    world: MockWeb  # set on the subclass built by make_server

    def log_message(self, format, *args):  # noqa: A002 - silence default stderr logging
        pass

    def _reply(self, status: int, doc: dict) -> None:
        body = json.dumps(doc, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _dispatch(self, method: str) -> None:
        parts = urlsplit(self.path)
        segs = parts.path.lstrip("/").split("/", 1)
        site_id = unquote(segs[0])
        route_path = "/" + (segs[1] if len(segs) > 1 else "")
        route_path = "/".join(unquote(s) for s in route_path.split("/"))
        params = dict(parse_qsl(parts.query, keep_blank_values=True))
        if method == "POST":
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if raw:
                try:
                    body = json.loads(raw)
                except ValueError:
                    self._reply(400, {"error": "bad_params", "message": "body is not JSON"})
                    return
                if not isinstance(body, dict):
                    self._reply(400, {"error": "bad_params", "message": "body must be a JSON object"})
                    return
                params.update(body)
        session = self.headers.get("X-Session") or "default"
        status, doc = self.world.api(site_id, method, route_path, params, session)
        self._reply(status, doc)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")


def make_server(world: MockWeb, host: str = "127.0.0.1", port: int = DEFAULT_PORT) -> ThreadingHTTPServer:
    handler = type("MockWebHandler", (_Handler,), {"world": world})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


class BackgroundServer:
    """Context manager running the facade on a daemon thread."""

    def __init__(self, world: MockWeb, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
        self.server = make_server(world, host, port)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
        self.thread.join(timeout=5)
