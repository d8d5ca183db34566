"""Raster input/output: PNG (via Pillow), binary PPM (P6) and PGM (P5).

PPM/PGM are parsed and emitted directly: the formats are trivial, and
decoding them ourselves lets corrupt files be reported distinctly from
unsupported ones. PNG goes through Pillow.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, UnreadableFileError, UnsupportedFormatError

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class RGBImage:
    """Decoded RGB raster; pixels are row-major (height, width, 3) uint8."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x3"
            )
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixel channels must be uint8 (0..255)")


def load_image(path: str | Path) -> RGBImage:
    """Decode a PNG or binary PPM (P6) file into an RGBImage.

    Raises UnreadableFileError, UnsupportedFormatError or CorruptImageError
    so callers can distinguish the three failure classes.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except (FileNotFoundError, IsADirectoryError, PermissionError, OSError) as exc:
        raise UnreadableFileError(f"cannot read image file {path}: {exc}") from exc

    if raw.startswith(PNG_MAGIC):
        return _decode_png(raw, path)
    if raw.startswith(b"P6"):
        arr = _decode_pnm(raw, path, b"P6")
        h, w = arr.shape[:2]
        return RGBImage(width=w, height=h, pixels=arr)
    raise UnsupportedFormatError(
        f"{path}: not a PNG or binary PPM file (magic bytes {raw[:2]!r})"
    )


def _decode_png(raw: bytes, path: Path) -> RGBImage:
    try:
        with Image.open(io.BytesIO(raw)) as im:
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"{path}: PNG signature but undecodable: {exc}") from exc
    except (OSError, ValueError, SyntaxError) as exc:
        raise CorruptImageError(f"{path}: corrupt PNG data: {exc}") from exc
    h, w = arr.shape[:2]
    return RGBImage(width=w, height=h, pixels=arr)


def _decode_pnm(raw: bytes, path: Path, magic: bytes) -> np.ndarray:
    """Decode binary PPM (P6) or PGM (P5). Returns (h, w, 3) or (h, w) uint8/uint16."""
    try:
        fields, offset = _read_pnm_header(raw)
    except ValueError as exc:
        raise CorruptImageError(f"{path}: corrupt PNM header: {exc}") from exc
    width, height, maxval = fields
    channels = 3 if magic == b"P6" else 1
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    count = width * height * channels
    body = raw[offset:]
    expected = count * np.dtype(dtype).itemsize
    if len(body) < expected:
        raise CorruptImageError(
            f"{path}: truncated PNM body: expected {expected} bytes, found {len(body)}"
        )
    arr = np.frombuffer(body[:expected], dtype=dtype).astype(
        np.uint16 if maxval >= 256 else np.uint8
    )
    if channels == 3:
        return arr.reshape(height, width, 3)
    return arr.reshape(height, width)


def _read_pnm_header(raw: bytes) -> tuple[tuple[int, int, int], int]:
    """Parse 'P6/P5 <w> <h> <maxval>' with comments; return fields and body offset."""
    pos = 2  # past magic
    values: list[int] = []
    while len(values) < 3:
        # skip whitespace and comments
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ValueError("expected an integer header field")
        values.append(int(raw[start:pos]))
    if pos >= len(raw) or not raw[pos : pos + 1].isspace():
        raise ValueError("missing single whitespace after maxval")
    pos += 1
    width, height, maxval = values
    if width < 1 or height < 1:
        raise ValueError(f"non-positive dimensions {width}x{height}")
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval {maxval} out of range")
    return (width, height, maxval), pos


def load_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM (P5); returns (h, w) uint8 or uint16 array."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read PGM file {path}: {exc}") from exc
    if not raw.startswith(b"P5"):
        raise UnsupportedFormatError(f"{path}: not a binary PGM (P5) file")
    return _decode_pnm(raw, path, b"P5")


def write_pgm(path: str | Path, data: np.ndarray, maxval: int = 255) -> None:
    """Write (h, w) integer data as binary PGM; maxval 255 or 65535."""
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError("PGM data must be 2-D")
    if data.min() < 0 or data.max() > maxval:
        raise ValueError("PGM data out of range for maxval")
    h, w = data.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode()
    body = data.astype(np.uint8 if maxval == 255 else ">u2").tobytes()
    Path(path).write_bytes(header + body)


def write_ppm(path: str | Path, pixels: np.ndarray) -> None:
    """Write (h, w, 3) uint8 pixels as binary PPM (P6)."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("PPM data must be (h, w, 3)")
    h, w = pixels.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode()
    Path(path).write_bytes(header + pixels.tobytes())


def write_png(path: str | Path, pixels: np.ndarray) -> None:
    """Write (h, w, 3) uint8 pixels as PNG."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    Image.fromarray(pixels, mode="RGB").save(str(path), format="PNG")
