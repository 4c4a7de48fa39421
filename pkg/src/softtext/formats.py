"""File formats: ICDAR-style annotation/detection text and PFM float rasters.

PFM (Portable Float Map, single channel "Pf") is the score-map interchange
format: a three-token ASCII header, then raw 32-bit floats, rows stored
bottom-to-top. A negative scale marker means little-endian payload. Values
round-trip bit for bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DegenerateQuad, FormatError, ParseError
from .geometry import Quad
from .labelgen import AnnotatedScene, TextBox

IGNORE_TRANSCRIPT = "###"


def parse_icdar(text: str) -> list[TextBox]:
    """One box per nonempty line: 8 leading numbers, then an optional transcript.

    The transcript is everything after the eighth comma and may itself contain
    commas; "###" marks an ignore region. Vertex order in the file may be
    clockwise or counter-clockwise; boxes are canonicalized on load.
    """
    if text.startswith("﻿"):
        text = text[1:]
    boxes = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",", 8)
        if len(parts) < 8:
            raise ParseError(line_no, f"expected 8 coordinates, found {len(parts)}")
        try:
            coords = [float(p) for p in parts[:8]]
        except ValueError:
            bad = next(p for p in parts[:8] if not _is_number(p))
            raise ParseError(line_no, f"bad coordinate {bad.strip()!r}") from None
        transcript = parts[8] if len(parts) == 9 else ""
        try:
            quad = Quad(list(zip(coords[0::2], coords[1::2])))
        except DegenerateQuad as exc:
            raise ParseError(line_no, f"degenerate box: {exc}") from None
        boxes.append(TextBox(quad=quad, transcript=transcript,
                             ignore=transcript.strip() == IGNORE_TRANSCRIPT))
    return boxes


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_detections(quads: list[Quad]) -> str:
    """Detection lines: 8 integer-rounded coordinates, no transcript.

    Sub-pixel slivers whose vertices collapse under rounding are skipped so
    every emitted line parses back into a valid box.
    """
    lines = []
    for q in quads:
        rounded = [int(round(v)) for v in q.pts.ravel()]
        try:
            Quad(list(zip(rounded[0::2], rounded[1::2])))
        except DegenerateQuad:
            continue
        lines.append(",".join(str(v) for v in rounded))
    return "".join(line + "\n" for line in lines)


def write_annotations(boxes: list[TextBox]) -> str:
    """Ground-truth lines: 8 float coordinates plus the transcript."""
    lines = []
    for b in boxes:
        coords = [f"{v:.6f}" for v in b.quad.pts.ravel()]
        lines.append(",".join(coords) + "," + b.transcript)
    return "".join(line + "\n" for line in lines)


def read_gt_file(path: Path | str) -> list[TextBox]:
    return parse_icdar(Path(path).read_text(encoding="utf-8-sig"))


def read_detections_file(path: Path | str) -> list[Quad]:
    return [b.quad for b in parse_icdar(Path(path).read_text(encoding="utf-8-sig"))]


def read_scene_file(path: Path | str, width: int, height: int) -> AnnotatedScene:
    return AnnotatedScene(width=width, height=height, boxes=read_gt_file(path))


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Read one header token followed by exactly one whitespace byte."""
    start = pos
    while pos < len(data) and data[pos:pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        pos += 1
    if pos == start:
        raise FormatError(pos, "empty header token")
    if pos >= len(data):
        raise FormatError(pos, "truncated header")
    return data[start:pos], pos + 1


def read_pfm(data: bytes) -> np.ndarray:
    """Decode a single-channel PFM byte string to a float32 (h, w) array."""
    magic, pos = _next_token(data, 0)
    if magic == b"PF":
        raise FormatError(0, "3-channel 'PF' rasters are not supported; expected 'Pf'")
    if magic != b"Pf":
        raise FormatError(0, f"bad magic {magic!r}; expected 'Pf'")
    wtok, pos2 = _next_token(data, pos)
    htok, pos3 = _next_token(data, pos2)
    try:
        width, height = int(wtok), int(htok)
    except ValueError:
        raise FormatError(pos, f"bad dimensions {wtok!r} x {htok!r}") from None
    if width <= 0 or height <= 0:
        raise FormatError(pos, f"bad dimensions {width} x {height}")
    stok, payload_at = _next_token(data, pos3)
    try:
        scale = float(stok)
    except ValueError:
        raise FormatError(pos3, f"bad scale token {stok!r}") from None
    if scale == 0.0:
        raise FormatError(pos3, "scale must be nonzero")
    dtype = "<f4" if scale < 0 else ">f4"

    expected = width * height * 4
    payload = data[payload_at:]
    if len(payload) < expected:
        raise FormatError(len(data),
                          f"payload is {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise FormatError(payload_at + expected,
                          f"{len(payload) - expected} trailing bytes after payload")
    values = np.frombuffer(payload, dtype=dtype).astype("<f4", copy=False)
    return np.flipud(values.reshape(height, width)).copy()


def write_pfm(m: np.ndarray) -> bytes:
    """Encode a (h, w) float32 array as little-endian single-channel PFM."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d raster, got shape {arr.shape}")
    height, width = arr.shape
    header = f"Pf\n{width} {height}\n-1.0\n".encode("ascii")
    return header + np.flipud(arr).astype("<f4").tobytes()


def load_pfm(path: Path | str) -> np.ndarray:
    return read_pfm(Path(path).read_bytes())


def save_pfm(path: Path | str, m: np.ndarray) -> None:
    Path(path).write_bytes(write_pfm(m))
