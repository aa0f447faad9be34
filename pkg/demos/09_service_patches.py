"""Drive the HTTP service like the browser editor does: patches only."""

import base64
import json
import threading
import urllib.request
from pathlib import Path

import numpy as np

from spanrender.pixelset import Shape
from spanrender.pngio import decode_png
from spanrender.sceneio import parse_scene
from spanrender.service import make_server

doc = parse_scene((Path(__file__).parent.parent / "scenes" / "demo.txt").read_text())
server, _ = make_server(doc, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"

def post(path, payload=None):
    req = urllib.request.Request(base + path, data=json.dumps(payload or {}).encode(),
                                 headers={"Content-Type": "application/json"})
    return json.loads(urllib.request.urlopen(req).read())

frame = decode_png(urllib.request.urlopen(base + "/frame").read())
print("fetched initial frame:", frame.shape)

post("/session/begin", {"target": "oval"})
print("\ndragging the oval; every screen change arrives as a patch:")
for dx, dy in [(3, 1), (3, 1), (3, 1)]:
    patch = post("/session/preview", {"op": {"kind": "translate", "dx": dx, "dy": dy, "target": "oval"}})
    up = patch["update"]
    crop = decode_png(base64.b64decode(up["png"]))
    x0, y0, x1, y1 = up["bbox"]
    for y, spans in Shape.from_text(up["spans"]).rows:
        for s, e in spans:
            frame[y, s : e + 1] = crop[y - y0, s - x0 : e - x0 + 1]
    print(f"  moved by ({dx},{dy}): {up['area']} damaged px in bbox {up['bbox']}")

server_frame = decode_png(urllib.request.urlopen(base + "/frame").read())
print("\nclient frame rebuilt from patches == server frame:",
      bool(np.array_equal(frame, server_frame)))

patch = post("/session/abandon")
print("abandoned: restore patch covered", patch["update"]["area"], "px")
server.shutdown()
server.server_close()
