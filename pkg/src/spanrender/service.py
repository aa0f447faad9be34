"""HTTP service exposing render and interactive-edit endpoints.

Single-threaded on purpose: edits are serialized by construction, matching
the one-live-session protocol.  Responses are deterministic for a given edit
sequence (no timestamps, fixed PNG encoding).

Endpoints:

* ``GET  /scene``            scene description (ids, kinds, canvas)
* ``GET  /render``           committed scene as PNG; ``x0..y1``/``subpixel``
* ``GET  /frame``            current frame (including preview state) as PNG
* ``GET  /stats``            cumulative and last-step render statistics
* ``POST /session/begin``    ``{"target": id}``
* ``POST /session/preview``  ``{"op": {...}}`` -> patch for the damaged pixels
* ``POST /session/commit``   promote the preview into the scene
* ``POST /session/abandon``  restore the pre-session scene -> patch
* ``POST /edit``             ``{"op": {...}}`` committed edit -> patch

A patch carries the damage both ways: the span list in debug text form and a
PNG crop of the frame over the damage bounding box.
"""

from __future__ import annotations

import base64
import json
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from .coherence import EditOp, SessionError, UnknownObject, Workspace
from .filters import FilterObject
from .pixelset import Shape
from .pngio import encode_png
from .renderer import RenderStats, render_region
from .sceneio import SceneDocument
from .sprite import surface_to_straight_u8


class ServiceState:
    """Scene + workspace shared by all requests."""

    def __init__(
        self, doc: SceneDocument, use_cache: bool = True, cache_budget: int = 8 << 20
    ):
        self.doc = doc
        self.workspace = Workspace(
            doc.to_scene(),
            doc.width,
            doc.height,
            use_cache=use_cache,
            cache_budget=cache_budget,
        )

    # -- payload builders ---------------------------------------------------

    def scene_info(self) -> dict:
        objs = []
        for depth, obj in enumerate(self.doc.objects):
            kind = f"filter.{obj.kind}" if isinstance(obj, FilterObject) else type(obj.geometry).__name__.lower()
            objs.append({"id": obj.oid, "kind": kind, "depth": depth})
        return {
            "width": self.doc.width,
            "height": self.doc.height,
            "background": list(self.doc.background.to_straight()),
            "objects": objs,
        }

    def render_png(self, rect, subpixel: bool) -> bytes:
        surface, _ = render_region(
            self.workspace.scene,
            rect,
            cache=None,
            mode="subpixel" if subpixel else "normal",
        )
        return encode_png(surface_to_straight_u8(surface))

    def frame_png(self) -> bytes:
        return encode_png(surface_to_straight_u8(self.workspace.frame))

    def patch_payload(self, update: Shape) -> dict:
        if update.is_empty():
            return {"update": {"area": 0, "spans": "", "bbox": None, "png": None}}
        x0, y0, x1, y1 = update.bounds()
        crop = self.workspace.frame[y0 : y1 + 1, x0 : x1 + 1]
        png = encode_png(surface_to_straight_u8(np.ascontiguousarray(crop)))
        return {
            "update": {
                "area": update.area(),
                "spans": update.to_text(),
                "bbox": [x0, y0, x1, y1],
                "png": base64.b64encode(png).decode("ascii"),
            }
        }

    def stats_payload(self) -> dict:
        def fields(stats: RenderStats) -> dict:
            return {
                "totals": {
                    f: stats.total(f)
                    for f in (
                        "rasterized_pixels",
                        "compose_ops",
                        "cache_hits",
                        "cache_misses",
                        "subpixel_pixels",
                    )
                },
                "objects": {k: dict(v) for k, v in stats.per_object.items()},
            }

        return {
            "cumulative": fields(self.workspace.stats),
            "last": fields(self.workspace.last_stats),
        }

    def make_op(self, body: dict) -> EditOp:
        op = body.get("op") or {}
        kind = op.get("kind")
        target = op.get("target") or body.get("target") or ""
        if kind == "translate":
            return EditOp("translate", target, dx=float(op["dx"]), dy=float(op["dy"]))
        if kind == "rotate":
            return EditOp(
                "rotate",
                target,
                angle=float(op["angle"]),
                cx=float(op.get("cx", self.doc.width / 2)),
                cy=float(op.get("cy", self.doc.height / 2)),
            )
        if kind == "delete":
            return EditOp("delete", target)
        raise BadRequest(f"unsupported op kind {kind!r}")


class BadRequest(ValueError):
    pass


def make_handler(state: ServiceState, web_root: str | None):
    web_dir = Path(web_root).resolve() if web_root else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        # -- plumbing -----------------------------------------------------

        def _send(self, code: int, body: bytes, ctype: str) -> None:
            self.send_response(code)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _json(self, code: int, payload: dict) -> None:
            self._send(
                code,
                json.dumps(payload, sort_keys=True).encode("utf-8"),
                "application/json",
            )

        def _error(self, code: int, kind: str, message: str) -> None:
            self._json(code, {"error": {"code": kind, "message": message}})

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                parsed = json.loads(raw)
            except json.JSONDecodeError as e:
                raise BadRequest(f"bad JSON body: {e}") from None
            if not isinstance(parsed, dict):
                raise BadRequest("JSON body must be an object")
            return parsed

        # -- routes ---------------------------------------------------------

        def do_GET(self):
            url = urlparse(self.path)
            try:
                if url.path == "/scene":
                    self._json(200, state.scene_info())
                elif url.path == "/render":
                    q = parse_qs(url.query)

                    def geti(key, default):
                        return int(q[key][0]) if key in q else default

                    rect = (
                        geti("x0", 0),
                        geti("y0", 0),
                        geti("x1", state.doc.width - 1),
                        geti("y1", state.doc.height - 1),
                    )
                    subpixel = q.get("subpixel", ["0"])[0] in ("1", "true")
                    self._send(200, state.render_png(rect, subpixel), "image/png")
                elif url.path == "/frame":
                    self._send(200, state.frame_png(), "image/png")
                elif url.path == "/stats":
                    self._json(200, state.stats_payload())
                elif web_dir is not None:
                    self._static(url.path)
                else:
                    self._error(404, "not_found", f"no route {url.path}")
            except (BadRequest, ValueError) as e:
                self._error(400, "bad_request", str(e))

        def _static(self, path: str) -> None:
            rel = path.lstrip("/") or "index.html"
            target = (web_dir / rel).resolve()
            if not str(target).startswith(str(web_dir)) or not target.is_file():
                self._error(404, "not_found", f"no route {path}")
                return
            ctype = {
                ".html": "text/html",
                ".js": "text/javascript",
                ".css": "text/css",
                ".png": "image/png",
            }.get(target.suffix, "application/octet-stream")
            self._send(200, target.read_bytes(), ctype)

        def do_POST(self):
            url = urlparse(self.path)
            ws = state.workspace
            try:
                body = self._body()
                if url.path == "/session/begin":
                    target = body.get("target")
                    if not target:
                        raise BadRequest("missing 'target'")
                    ws.session_begin(target)
                    self._json(200, {"ok": True, "target": target})
                elif url.path == "/session/preview":
                    update = ws.session_preview(state.make_op(body))
                    self._json(200, state.patch_payload(update))
                elif url.path == "/session/commit":
                    ws.session_commit()
                    self._json(200, {"ok": True})
                elif url.path == "/session/abandon":
                    update = ws.session_abandon()
                    self._json(200, state.patch_payload(update))
                elif url.path == "/edit":
                    update = ws.apply_edit(state.make_op(body))
                    self._json(200, state.patch_payload(update))
                else:
                    self._error(404, "not_found", f"no route {url.path}")
            except BadRequest as e:
                self._error(400, "bad_request", str(e))
            except UnknownObject as e:
                self._error(404, "unknown_object", str(e))
            except SessionError as e:
                self._error(409, "session_conflict", str(e))
            except (KeyError, TypeError, ValueError) as e:
                self._error(400, "bad_request", f"malformed request: {e}")

    return Handler


def make_server(
    doc: SceneDocument,
    host: str = "127.0.0.1",
    port: int = 0,
    web_root: str | None = None,
    use_cache: bool = True,
    cache_budget: int = 8 << 20,
) -> tuple[HTTPServer, ServiceState]:
    state = ServiceState(doc, use_cache=use_cache, cache_budget=cache_budget)
    server = HTTPServer((host, port), make_handler(state, web_root))
    return server, state


def run_server(doc, host, port, web_root=None, use_cache=True, cache_budget=8 << 20) -> None:
    server, _ = make_server(doc, host, port, web_root, use_cache, cache_budget)
    print(f"serving on http://{host}:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
