"""Minimal deterministic image writers: PNG (RGBA8) and portable pixmaps.

Hand-rolled so output bytes depend only on pixel data: fixed zlib settings,
no ancillary chunks, no timestamps.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, data: bytes) -> bytes:
    return (
        struct.pack(">I", len(data))
        + tag
        + data
        + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
    )


def encode_png(rgba: np.ndarray) -> bytes:
    """Encode an (H, W, 4) uint8 array as a straight-alpha RGBA PNG."""
    if rgba.dtype != np.uint8 or rgba.ndim != 3 or rgba.shape[2] != 4:
        raise ValueError("encode_png expects (H, W, 4) uint8")
    h, w = rgba.shape[:2]
    raw = bytearray()
    for y in range(h):
        raw.append(0)  # filter type: none
        raw += rgba[y].tobytes()
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 6, 0, 0, 0)
    idat = zlib.compress(bytes(raw), 6)
    return _PNG_SIG + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNGs produced by :func:`encode_png` (8-bit RGBA, filter 0)."""
    if data[:8] != _PNG_SIG:
        raise ValueError("not a PNG")
    pos = 8
    w = h = None
    idat = bytearray()
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        tag = data[pos + 4 : pos + 8]
        body = data[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            w, h, depth, ctype = struct.unpack(">IIBB", body[:10])
            if depth != 8 or ctype != 6:
                raise ValueError("only 8-bit RGBA supported")
        elif tag == b"IDAT":
            idat += body
        elif tag == b"IEND":
            break
    raw = zlib.decompress(bytes(idat))
    stride = w * 4 + 1
    out = np.empty((h, w, 4), dtype=np.uint8)
    prev = np.zeros(w * 4, dtype=np.uint8)
    for y in range(h):
        row = raw[y * stride : (y + 1) * stride]
        ftype = row[0]
        cur = np.frombuffer(row[1:], dtype=np.uint8).copy()
        if ftype == 0:
            pass
        elif ftype == 2:  # up
            cur = (cur.astype(np.int16) + prev).astype(np.uint8)
        else:
            raise ValueError(f"unsupported PNG filter {ftype}")
        out[y] = cur.reshape(w, 4)
        prev = out[y].reshape(-1)
    return out


def encode_pam(rgba: np.ndarray) -> bytes:
    """P7 portable arbitrary map, RGBA8; used for raw golden files."""
    if rgba.dtype != np.uint8 or rgba.ndim != 3 or rgba.shape[2] != 4:
        raise ValueError("encode_pam expects (H, W, 4) uint8")
    h, w = rgba.shape[:2]
    header = (
        f"P7\nWIDTH {w}\nHEIGHT {h}\nDEPTH 4\nMAXVAL 255\n"
        "TUPLTYPE RGB_ALPHA\nENDHDR\n"
    ).encode("ascii")
    return header + rgba.tobytes()


def encode_ppm(rgb: np.ndarray) -> bytes:
    """P6 portable pixmap from an (H, W, 3) uint8 array."""
    if rgb.dtype != np.uint8 or rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("encode_ppm expects (H, W, 3) uint8")
    h, w = rgb.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()
