"""HTTP service tests: endpoints, session protocol, cross-checks with the CLI."""

import base64
import json
import threading
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np
import pytest

from spanrender.pngio import decode_png
from spanrender.sceneio import parse_scene
from spanrender.service import make_server

ROOT = Path(__file__).resolve().parent.parent
DEMO = (ROOT / "scenes" / "demo.txt").read_text()


@pytest.fixture()
def server():
    doc = parse_scene(DEMO)
    srv, state = make_server(doc, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    try:
        yield base, state
    finally:
        srv.shutdown()
        srv.server_close()
        thread.join(timeout=5)


def get(base, path):
    with urllib.request.urlopen(base + path) as r:
        return r.read(), r.headers.get_content_type()


def post(base, path, payload=None):
    data = json.dumps(payload or {}).encode()
    req = urllib.request.Request(
        base + path, data=data, headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(req) as r:
        return json.loads(r.read()), r.status


def post_error(base, path, payload=None):
    try:
        post(base, path, payload)
    except urllib.error.HTTPError as e:
        return json.loads(e.read()), e.code
    raise AssertionError("expected an HTTP error")


def test_scene_description(server):
    base, _ = server
    body, ctype = get(base, "/scene")
    info = json.loads(body)
    assert ctype == "application/json"
    assert (info["width"], info["height"]) == (64, 64)
    ids = [o["id"] for o in info["objects"]]
    assert ids == ["grad", "oval", "ring", "tri", "stroke", "blurf"]
    assert info["objects"][-1]["kind"] == "filter.blur"


def test_render_matches_cli_bytes(server, tmp_path):
    base, _ = server
    png, ctype = get(base, "/render")
    assert ctype == "image/png"

    from spanrender import cli

    scene = tmp_path / "demo.txt"
    scene.write_text(DEMO)
    out = tmp_path / "out.png"
    assert cli.main(["render", str(scene), str(out)]) == 0
    assert out.read_bytes() == png  # same engine, byte-identical

    region_png, _ = get(base, "/render?x0=4&y0=4&x1=17&y1=13")
    assert decode_png(region_png).shape == (10, 14, 4)


def test_preview_patch_and_abandon_restores(server):
    base, _ = server
    before, _ = get(base, "/frame")

    body, _ = post(base, "/session/begin", {"target": "oval"})
    assert body["ok"]
    patch, _ = post(
        base,
        "/session/preview",
        {"op": {"kind": "translate", "dx": 5, "dy": 3, "target": "oval"}},
    )
    up = patch["update"]
    assert up["area"] > 0
    assert up["bbox"] is not None
    crop = decode_png(base64.b64decode(up["png"]))
    x0, y0, x1, y1 = up["bbox"]
    assert crop.shape == (y1 - y0 + 1, x1 - x0 + 1, 4)
    assert up["spans"].count("\n") >= 1

    during, _ = get(base, "/frame")
    assert during != before

    patch2, _ = post(base, "/session/abandon")
    after, _ = get(base, "/frame")
    assert after == before  # byte-identical restore
    assert patch2["update"]["area"] > 0


def test_commit_persists_and_render_follows(server):
    base, _ = server
    post(base, "/session/begin", {"target": "oval"})
    post(base, "/session/preview", {"op": {"kind": "translate", "dx": 6, "dy": 0, "target": "oval"}})
    post(base, "/session/commit")
    frame, _ = get(base, "/frame")
    rendered, _ = get(base, "/render")
    a = decode_png(frame).astype(int)
    b = decode_png(rendered).astype(int)
    assert np.abs(a - b).max() <= 1


def test_second_session_rejected(server):
    base, _ = server
    post(base, "/session/begin", {"target": "oval"})
    body, code = post_error(base, "/session/begin", {"target": "tri"})
    assert code == 409
    assert body["error"]["code"] == "session_conflict"
    post(base, "/session/abandon")


def test_malformed_requests(server):
    base, _ = server
    body, code = post_error(base, "/session/begin", {})
    assert code == 400
    body, code = post_error(base, "/session/begin", {"target": "ghost"})
    assert code == 404
    assert body["error"]["code"] == "unknown_object"

    post(base, "/session/begin", {"target": "oval"})
    body, code = post_error(base, "/session/preview", {"op": {"kind": "warp"}})
    assert code == 400
    post(base, "/session/abandon")

    req = urllib.request.Request(
        base + "/session/begin", data=b"{not json", headers={"Content-Type": "application/json"}
    )
    try:
        urllib.request.urlopen(req)
        raise AssertionError("expected 400")
    except urllib.error.HTTPError as e:
        assert e.code == 400

    body, code = post_error(base, "/no/such", {})
    assert code == 404


def test_preview_costs_match_replay(server):
    base, state = server
    post(base, "/session/begin", {"target": "oval"})
    post(base, "/session/preview", {"op": {"kind": "translate", "dx": 4, "dy": 2, "target": "oval"}})
    post(base, "/session/commit")
    stats, _ = post(base, "/stats") if False else (json.loads(get(base, "/stats")[0]), 200)
    service_total = stats["cumulative"]["totals"]["rasterized_pixels"]

    from spanrender.sceneio import ReplayRunner, parse_script

    runner = ReplayRunner(parse_scene(DEMO))
    runner.run(parse_script("script v1\nselect oval\ntranslate 4 2\ncommit\n"))
    replay_total = runner.workspace.stats.total("rasterized_pixels")
    assert service_total == replay_total

    # frames agree too
    frame, _ = get(base, "/frame")
    from spanrender.sceneio import frame_to_png

    assert frame == frame_to_png(runner.workspace.frame)


def test_stats_endpoint_shape(server):
    base, _ = server
    stats = json.loads(get(base, "/stats")[0])
    assert "cumulative" in stats and "last" in stats
    assert "rasterized_pixels" in stats["cumulative"]["totals"]
