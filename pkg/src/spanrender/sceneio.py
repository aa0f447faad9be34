"""Scene and edit-script text formats, plus the deterministic replay engine.

Scene files are line-oriented with explicit keywords, one object per line,
listed back to front::

    scene v1
    canvas 64 64 background=1,1,1,1
    object tri polygon fill=solid(0.9,0.2,0.1,0.5) points=30,6;58,18;40,40
    object blurf filter.blur kernel=5x5 fill=solid(1,1,1,1) geometry=polygon(4,4;30,4;30,30;4,30)

Geometry expressions nest without spaces: ``polygon(x,y;x,y;...)``,
``brush(radius:x,y;x,y;...)``, ``union(g|g)``, ``intersection(g|g)``,
``difference(g|g)``.  Colors are straight-alpha in files and premultiplied in
memory.

Edit scripts drive the interactive protocol::

    script v1
    select tri
    translate 5 3
    commit
    rotate 30 32 32        # no session open: a direct committed edit
    snapshot after-rotate
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

import numpy as np

from .coherence import EditOp, SessionError, UnknownObject, Workspace
from .filters import (
    FilterObject,
    builtin_affine,
    builtin_blur,
    builtin_hole,
    builtin_monochrome,
)
from .geometry import (
    BrushStroke,
    Combine,
    LinearGradient,
    Polygon,
    Solid,
)
from .pngio import encode_png
from .renderer import Scene, SceneObject
from .sprite import Color, surface_to_straight_u8


class SceneParseError(ValueError):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class SceneSyntaxError(SceneParseError):
    pass


class UnknownKindError(SceneParseError):
    pass


class DuplicateIdError(SceneParseError):
    pass


class BadReferenceError(SceneParseError):
    pass


@dataclass(frozen=True)
class SceneDocument:
    """Parsed scene file: canvas plus objects in file (back-to-front) order."""

    width: int
    height: int
    background: Color
    objects: tuple[SceneObject, ...] = ()

    def to_scene(self) -> Scene:
        return Scene(tuple(reversed(self.objects)), self.background)

    def object_ids(self) -> list[str]:
        return [o.oid for o in self.objects]


@dataclass(frozen=True)
class ScriptCommand:
    verb: str
    args: tuple
    line: int


@dataclass(frozen=True)
class EditScript:
    commands: tuple[ScriptCommand, ...]


# -- low-level texture -------------------------------------------------------


_NUM_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")


def _parse_floats(text: str, n: int, line: int, col: int) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise SceneSyntaxError(f"expected {n} numbers, got {text!r}", line, col)
    out = []
    for p in parts:
        if not _NUM_RE.fullmatch(p.strip()):
            raise SceneSyntaxError(f"bad number {p!r}", line, col)
        out.append(float(p))
    return out


def _parse_points(text: str, line: int, col: int) -> tuple[tuple[float, float], ...]:
    pts = []
    for item in text.split(";"):
        x, y = _parse_floats(item, 2, line, col)
        pts.append((x, y))
    return tuple(pts)


def _parse_color(text: str, line: int, col: int) -> Color:
    r, g, b, a = _parse_floats(text, 4, line, col)
    for v in (r, g, b, a):
        if not 0.0 <= v <= 1.0:
            raise SceneSyntaxError(f"color channel {v} outside [0,1]", line, col)
    return Color.from_straight(r, g, b, a)


def _parse_fill(text: str, line: int, col: int):
    if text.startswith("solid(") and text.endswith(")"):
        return Solid(_parse_color(text[6:-1], line, col))
    if text.startswith("gradient(") and text.endswith(")"):
        parts = text[9:-1].split(";")
        if len(parts) != 4:
            raise SceneSyntaxError(
                "gradient(x0,y0;x1,y1;r,g,b,a;r,g,b,a) expected", line, col
            )
        x0, y0 = _parse_floats(parts[0], 2, line, col)
        x1, y1 = _parse_floats(parts[1], 2, line, col)
        c0 = _parse_color(parts[2], line, col)
        c1 = _parse_color(parts[3], line, col)
        return LinearGradient((x0, y0), (x1, y1), c0, c1)
    raise SceneSyntaxError(f"unknown fill {text!r}", line, col)


def _split_top(text: str, sep: str) -> list[str]:
    """Split at top nesting level only."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _parse_geometry(text: str, line: int, col: int):
    for name in ("union", "intersection", "difference"):
        if text.startswith(name + "(") and text.endswith(")"):
            inner = text[len(name) + 1 : -1]
            parts = _split_top(inner, "|")
            if len(parts) != 2:
                raise SceneSyntaxError(f"{name}(g|g) takes two operands", line, col)
            return Combine(
                name,
                _parse_geometry(parts[0], line, col),
                _parse_geometry(parts[1], line, col),
            )
    if text.startswith("polygon(") and text.endswith(")"):
        return Polygon(_parse_points(text[8:-1], line, col))
    if text.startswith("brush(") and text.endswith(")"):
        inner = text[6:-1]
        radius_text, _, path_text = inner.partition(":")
        if not path_text:
            raise SceneSyntaxError("brush(radius:points) expected", line, col)
        radius = _parse_floats(radius_text, 1, line, col)[0]
        return BrushStroke(_parse_points(path_text, line, col), radius)
    raise SceneSyntaxError(f"unknown geometry {text!r}", line, col)


def _kv_tokens(tokens: list[str], line: int) -> dict[str, tuple[str, int]]:
    out = {}
    col = 1
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq:
            raise SceneSyntaxError(f"expected key=value, got {tok!r}", line, col)
        if key in out:
            raise SceneSyntaxError(f"duplicate attribute {key!r}", line, col)
        out[key] = (val, col)
        col += len(tok) + 1
    return out


def _require(kv: dict, key: str, line: int):
    if key not in kv:
        raise SceneSyntaxError(f"missing attribute {key!r}", line, 1)
    return kv.pop(key)


# -- scene files --------------------------------------------------------------

_FILTER_KINDS = ("filter.blur", "filter.hole", "filter.affine", "filter.monochrome")
_PLAIN_KINDS = ("polygon", "brush", "combine")


def parse_scene(text: str) -> SceneDocument:
    lines = text.splitlines()
    idx = 0

    def next_content():
        nonlocal idx
        while idx < len(lines):
            raw = lines[idx]
            idx += 1
            stripped = raw.split("#", 1)[0].strip()
            if stripped:
                return stripped, idx
        return None, idx

    header, ln = next_content()
    if header is None or header.split() != ["scene", "v1"]:
        raise SceneSyntaxError("expected header 'scene v1'", ln)
    canvas, ln = next_content()
    if canvas is None or not canvas.startswith("canvas "):
        raise SceneSyntaxError("expected 'canvas W H background=r,g,b,a'", ln)
    ctokens = canvas.split()
    if len(ctokens) != 4:
        raise SceneSyntaxError("canvas takes width, height, background", ln)
    try:
        width, height = int(ctokens[1]), int(ctokens[2])
    except ValueError:
        raise SceneSyntaxError("canvas dimensions must be integers", ln) from None
    if width <= 0 or height <= 0:
        raise SceneSyntaxError("canvas dimensions must be positive", ln)
    ckv = _kv_tokens(ctokens[3:], ln)
    bg_text, bg_col = _require(ckv, "background", ln)
    background = _parse_color(bg_text, ln, bg_col)
    if background.a < 1.0:
        raise SceneSyntaxError("canvas background must be opaque", ln)

    objects: list[SceneObject] = []
    seen: dict[str, int] = {}
    while True:
        content, ln = next_content()
        if content is None:
            break
        tokens = content.split()
        if tokens[0] != "object":
            raise SceneSyntaxError(f"expected 'object', got {tokens[0]!r}", ln)
        if len(tokens) < 3:
            raise SceneSyntaxError("object needs an id and a kind", ln)
        oid, kind = tokens[1], tokens[2]
        if oid in seen:
            raise DuplicateIdError(f"duplicate object id {oid!r}", ln)
        seen[oid] = ln
        kv = _kv_tokens(tokens[3:], ln)
        objects.append(_parse_object(oid, kind, kv, ln))
        if kv:
            extra = next(iter(kv))
            raise SceneSyntaxError(f"unknown attribute {extra!r}", ln, kv[extra][1])

    doc = SceneDocument(width, height, background, tuple(objects))
    _check_references(doc, seen)
    return doc


def _parse_object(oid: str, kind: str, kv: dict, ln: int) -> SceneObject:
    if kind not in _PLAIN_KINDS + _FILTER_KINDS:
        raise UnknownKindError(f"unknown object kind {kind!r}", ln)
    fill_text, fill_col = _require(kv, "fill", ln)
    fill = _parse_fill(fill_text, ln, fill_col)
    if kind == "polygon":
        pts_text, pts_col = _require(kv, "points", ln)
        pts = _parse_points(pts_text, ln, pts_col)
        try:
            return SceneObject(oid, Polygon(pts), fill)
        except ValueError as e:
            raise SceneSyntaxError(str(e), ln, pts_col) from None
    if kind == "brush":
        radius_text, col = _require(kv, "radius", ln)
        radius = _parse_floats(radius_text, 1, ln, col)[0]
        path_text, path_col = _require(kv, "path", ln)
        try:
            return SceneObject(oid, BrushStroke(_parse_points(path_text, ln, path_col), radius), fill)
        except ValueError as e:
            raise SceneSyntaxError(str(e), ln, col) from None
    if kind == "combine":
        op, opcol = _require(kv, "op", ln)
        if op not in ("union", "intersection", "difference"):
            raise SceneSyntaxError(f"unknown combine op {op!r}", ln, opcol)
        left_text, left_col = _require(kv, "left", ln)
        right_text, right_col = _require(kv, "right", ln)
        left = _parse_geometry(left_text, ln, left_col)
        right = _parse_geometry(right_text, ln, right_col)
        return SceneObject(oid, Combine(op, left, right), fill)
    geom_text, geom_col = _require(kv, "geometry", ln)
    geometry = _parse_geometry(geom_text, ln, geom_col)
    if kind == "filter.blur":
        ktext, kcol = _require(kv, "kernel", ln)
        m = re.fullmatch(r"(\d+)x(\d+)", ktext)
        if not m:
            raise SceneSyntaxError(f"kernel must look like 5x5, got {ktext!r}", ln, kcol)
        try:
            return builtin_blur(oid, int(m.group(1)), int(m.group(2)), geometry, fill)
        except ValueError as e:
            raise SceneSyntaxError(str(e), ln, kcol) from None
    if kind == "filter.hole":
        target, _ = _require(kv, "target", ln)
        return builtin_hole(oid, geometry, fill, target=target)
    if kind == "filter.affine":
        mtext, mcol = _require(kv, "matrix", ln)
        vals = _parse_floats(mtext, 6, ln, mcol)
        try:
            return builtin_affine(oid, tuple(vals), geometry, fill)
        except ValueError as e:
            raise SceneSyntaxError(str(e), ln, mcol) from None
    return builtin_monochrome(oid, geometry, fill)


def _check_references(doc: SceneDocument, seen: dict[str, int]) -> None:
    for obj in doc.objects:
        if isinstance(obj, FilterObject) and obj.kind == "hole":
            target = obj.params[0]
            if target != "all" and target not in seen:
                raise BadReferenceError(
                    f"hole filter {obj.oid!r} targets unknown object {target!r}",
                    seen[obj.oid],
                )


def _fmt(v: float) -> str:
    return repr(float(v))


def _serialize_color(c: Color) -> str:
    return ",".join(_fmt(v) for v in c.to_straight())


def _serialize_fill(fill) -> str:
    if isinstance(fill, Solid):
        return f"solid({_serialize_color(fill.color)})"
    return (
        f"gradient({_fmt(fill.p0[0])},{_fmt(fill.p0[1])};"
        f"{_fmt(fill.p1[0])},{_fmt(fill.p1[1])};"
        f"{_serialize_color(fill.c0)};{_serialize_color(fill.c1)})"
    )


def _serialize_points(pts) -> str:
    return ";".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


def _serialize_geometry(g) -> str:
    if isinstance(g, Polygon):
        return f"polygon({_serialize_points(g.vertices)})"
    if isinstance(g, BrushStroke):
        return f"brush({_fmt(g.radius)}:{_serialize_points(g.path)})"
    return (
        f"{g.op}({_serialize_geometry(g.left)}|{_serialize_geometry(g.right)})"
    )


def serialize_scene(doc: SceneDocument) -> str:
    lines = [
        "scene v1",
        f"canvas {doc.width} {doc.height} background={_serialize_color(doc.background)}",
    ]
    for o in doc.objects:
        fill = _serialize_fill(o.fill)
        if isinstance(o, FilterObject):
            geom = _serialize_geometry(o.geometry)
            if o.kind == "blur":
                kw, kh = o.params
                lines.append(
                    f"object {o.oid} filter.blur kernel={kw}x{kh} fill={fill} geometry={geom}"
                )
            elif o.kind == "hole":
                lines.append(
                    f"object {o.oid} filter.hole target={o.params[0]} fill={fill} geometry={geom}"
                )
            elif o.kind == "affine":
                m = ",".join(_fmt(v) for v in o.params)
                lines.append(
                    f"object {o.oid} filter.affine matrix={m} fill={fill} geometry={geom}"
                )
            elif o.kind == "monochrome":
                lines.append(
                    f"object {o.oid} filter.monochrome fill={fill} geometry={geom}"
                )
            else:
                raise ValueError(f"cannot serialize filter kind {o.kind!r}")
        elif isinstance(o.geometry, Polygon):
            lines.append(
                f"object {o.oid} polygon fill={fill} points={_serialize_points(o.geometry.vertices)}"
            )
        elif isinstance(o.geometry, BrushStroke):
            lines.append(
                f"object {o.oid} brush radius={_fmt(o.geometry.radius)} fill={fill} "
                f"path={_serialize_points(o.geometry.path)}"
            )
        else:
            g = o.geometry
            lines.append(
                f"object {o.oid} combine op={g.op} fill={fill} "
                f"left={_serialize_geometry(g.left)} right={_serialize_geometry(g.right)}"
            )
    return "\n".join(lines) + "\n"


# -- edit scripts --------------------------------------------------------------

_SCRIPT_VERBS = {
    "select": 1,
    "translate": 2,
    "rotate": 3,
    "delete": 1,
    "commit": 0,
    "abandon": 0,
    "snapshot": 1,
}


def parse_script(text: str) -> EditScript:
    commands: list[ScriptCommand] = []
    snapshot_names: set[str] = set()
    header_seen = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if not header_seen:
            if stripped.split() != ["script", "v1"]:
                raise SceneSyntaxError("expected header 'script v1'", ln)
            header_seen = True
            continue
        tokens = stripped.split()
        verb = tokens[0]
        if verb == "add":
            if len(tokens) < 3:
                raise SceneSyntaxError("add needs an id, kind and attributes", ln)
            oid, kind = tokens[1], tokens[2]
            kv = _kv_tokens(tokens[3:], ln)
            obj = _parse_object(oid, kind, kv, ln)
            if kv:
                extra = next(iter(kv))
                raise SceneSyntaxError(f"unknown attribute {extra!r}", ln, kv[extra][1])
            commands.append(ScriptCommand("add", (obj,), ln))
            continue
        if verb not in _SCRIPT_VERBS:
            raise SceneSyntaxError(f"unknown command {verb!r}", ln)
        argc = _SCRIPT_VERBS[verb]
        if len(tokens) - 1 != argc:
            raise SceneSyntaxError(f"{verb} takes {argc} argument(s)", ln)
        args: tuple
        if verb in ("translate", "rotate"):
            try:
                args = tuple(float(t) for t in tokens[1:])
            except ValueError:
                raise SceneSyntaxError(f"{verb} takes numbers", ln) from None
        else:
            args = tuple(tokens[1:])
        if verb == "snapshot":
            if args[0] in snapshot_names:
                raise DuplicateIdError(f"duplicate snapshot name {args[0]!r}", ln)
            snapshot_names.add(args[0])
        commands.append(ScriptCommand(verb, args, ln))
    if not header_seen:
        raise SceneSyntaxError("expected header 'script v1'", 1)
    return EditScript(tuple(commands))


class ScriptError(RuntimeError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class ReplayResult:
    snapshots: dict[str, np.ndarray] = field(default_factory=dict)
    verified: bool = True
    mismatches: list[str] = field(default_factory=list)


class ReplayRunner:
    """Drives a Workspace from an edit script, patching a persistent frame."""

    def __init__(
        self,
        doc: SceneDocument,
        *,
        use_cache: bool = True,
        cache_budget: int = 8 << 20,
        mode: str = "normal",
    ):
        self.doc = doc
        self.workspace = Workspace(
            doc.to_scene(),
            doc.width,
            doc.height,
            use_cache=use_cache,
            cache_budget=cache_budget,
            mode=mode,
        )
        self.selected: str | None = None
        self.last_update = None  # damage shape of the most recent edit step

    def run(self, script: EditScript, *, verify: bool = False) -> ReplayResult:
        result = ReplayResult()
        for cmd in script.commands:
            try:
                self._step(cmd, result, verify)
            except (SessionError, UnknownObject) as e:
                raise ScriptError(str(e), cmd.line) from e
        return result

    def _step(self, cmd: ScriptCommand, result: ReplayResult, verify: bool) -> None:
        ws = self.workspace
        verb = cmd.verb
        if verb == "select":
            ws.session_begin(cmd.args[0])
            self.selected = cmd.args[0]
        elif verb in ("translate", "rotate"):
            if verb == "translate":
                op = EditOp("translate", self.selected or "", dx=cmd.args[0], dy=cmd.args[1])
            else:
                op = EditOp(
                    "rotate",
                    self.selected or "",
                    angle=cmd.args[0],
                    cx=cmd.args[1],
                    cy=cmd.args[2],
                )
            if ws.session is not None:
                if self.selected is None:
                    raise ScriptError("no object selected", cmd.line)
                self.last_update = ws.session_preview(op)
            else:
                raise ScriptError(f"{verb} without select", cmd.line)
        elif verb == "commit":
            ws.session_commit()
            self.selected = None
        elif verb == "abandon":
            ws.session_abandon()
            self.selected = None
        elif verb == "delete":
            self.last_update = ws.apply_edit(EditOp("delete", cmd.args[0]))
        elif verb == "add":
            obj = cmd.args[0]
            try:
                ws.scene.index_of(obj.oid)
            except KeyError:
                self.last_update = ws.apply_edit(EditOp("add", obj.oid, obj=obj))
            else:
                raise ScriptError(f"object {obj.oid!r} already exists", cmd.line)
        elif verb == "snapshot":
            name = cmd.args[0]
            frame = ws.frame.copy()
            result.snapshots[name] = frame
            if verify:
                scratch = ws.render_from_scratch()
                if float(np.max(np.abs(frame - scratch))) > 1.0 / 256.0:
                    result.verified = False
                    result.mismatches.append(name)
        else:  # pragma: no cover - parser rejects unknown verbs
            raise ScriptError(f"unhandled verb {verb!r}", cmd.line)


def frame_to_png(frame: np.ndarray) -> bytes:
    return encode_png(surface_to_straight_u8(frame))
