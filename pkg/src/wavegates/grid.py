"""Conductive grids: image thresholding, synthetic geometry, electrodes.

A ConductiveGrid is the boolean simulation domain. It can be derived from
an RGB image by per-channel strict thresholds, or rasterized from a
declarative list of geometric primitives. Rasterization is node-center
containment, so synthetic grids are reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .imgio import RGBImage, write_pgm


@dataclass(frozen=True)
class ThresholdSpec:
    """Strict lower bounds per channel: a pixel is conductive iff every
    channel strictly exceeds its bound."""

    r_min: int = 40
    g_min: int = 19
    b_min: int = 19

    def __post_init__(self):
        for name in ("r_min", "g_min", "b_min"):
            val = getattr(self, name)
            if not 0 <= val <= 255:
                raise ConfigError(f"threshold {name}={val} outside [0, 255]")


class ConductiveGrid:
    """Boolean mask of conductive nodes on a width x height lattice."""

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
            raise ValueError("mask must be a non-empty 2-D boolean array")
        self.mask = mask
        self.mask.setflags(write=False)
        self.height, self.width = mask.shape
        self.conductive_count = int(mask.sum())
        self._topology = None  # built lazily by the integrator

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_conductive(self, x: int, y: int) -> bool:
        return self.in_bounds(x, y) and bool(self.mask[y, x])

    def mask_hash(self) -> str:
        """Stable digest of dimensions + mask contents, used by checkpoints."""
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}:".encode())
        h.update(np.packbits(self.mask).tobytes())
        return h.hexdigest()

    def to_pgm(self, path) -> None:
        """Export the mask as binary PGM: 255 = conductive, 0 = not."""
        write_pgm(path, self.mask.astype(np.uint8) * 255, maxval=255)

    def __eq__(self, other):
        return isinstance(other, ConductiveGrid) and np.array_equal(self.mask, other.mask)

    def __repr__(self):
        return (
            f"ConductiveGrid({self.width}x{self.height}, "
            f"{self.conductive_count} conductive)"
        )


def threshold_mask(image: RGBImage, spec: ThresholdSpec = ThresholdSpec()) -> ConductiveGrid:
    """Node (i, j) is conductive iff r > r_min and g > g_min and b > b_min."""
    px = image.pixels
    mask = (px[:, :, 0] > spec.r_min) & (px[:, :, 1] > spec.g_min) & (px[:, :, 2] > spec.b_min)
    return ConductiveGrid(mask)


# --- synthetic geometry ---------------------------------------------------


@dataclass(frozen=True)
class Channel:
    """Straight flat-ended channel: node centers within perpendicular
    distance width/2 of segment start-end, projection clamped to [0, 1]."""

    start: tuple[float, float]
    end: tuple[float, float]
    width: float

    def bbox(self):
        hw = self.width / 2.0
        ax, ay = self.start
        bx, by = self.end
        dx, dy = bx - ax, by - ay
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            return (ax - hw, ay - hw, ax + hw, ay + hw)
        nx, ny = -dy / norm * hw, dx / norm * hw
        corners_x = (ax + nx, ax - nx, bx + nx, bx - nx)
        corners_y = (ay + ny, ay - ny, by + ny, by - ny)
        return (min(corners_x), min(corners_y), max(corners_x), max(corners_y))

    def rasterize(self, grid_w: int, grid_h: int) -> np.ndarray:
        xs = np.arange(grid_w, dtype=float)
        ys = np.arange(grid_h, dtype=float)
        gx, gy = np.meshgrid(xs, ys)
        ax, ay = self.start
        bx, by = self.end
        dx, dy = bx - ax, by - ay
        seg2 = dx * dx + dy * dy
        if seg2 == 0.0:
            d2 = (gx - ax) ** 2 + (gy - ay) ** 2
            return d2 <= (self.width / 2.0) ** 2
        t = ((gx - ax) * dx + (gy - ay) * dy) / seg2
        inside = (t >= 0.0) & (t <= 1.0)
        px = ax + t * dx
        py = ay + t * dy
        d2 = (gx - px) ** 2 + (gy - py) ** 2
        return inside & (d2 <= (self.width / 2.0) ** 2)


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def bbox(self):
        cx, cy = self.center
        return (cx - self.radius, cy - self.radius, cx + self.radius, cy + self.radius)

    def rasterize(self, grid_w: int, grid_h: int) -> np.ndarray:
        xs = np.arange(grid_w, dtype=float)
        ys = np.arange(grid_h, dtype=float)
        gx, gy = np.meshgrid(xs, ys)
        cx, cy = self.center
        return (gx - cx) ** 2 + (gy - cy) ** 2 <= self.radius**2


@dataclass(frozen=True)
class Junction:
    """Star of channels radiating from a center; angles in degrees."""

    center: tuple[float, float]
    arm_length: float
    arm_width: float
    angles: tuple[float, ...]

    def _arms(self):
        cx, cy = self.center
        for ang in self.angles:
            rad = math.radians(ang)
            end = (cx + self.arm_length * math.cos(rad), cy + self.arm_length * math.sin(rad))
            yield Channel(start=self.center, end=end, width=self.arm_width)

    def bbox(self):
        boxes = [arm.bbox() for arm in self._arms()]
        return (
            min(b[0] for b in boxes),
            min(b[1] for b in boxes),
            max(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def rasterize(self, grid_w: int, grid_h: int) -> np.ndarray:
        out = np.zeros((grid_h, grid_w), dtype=bool)
        for arm in self._arms():
            out |= arm.rasterize(grid_w, grid_h)
        return out


Primitive = Channel | Disc | Junction


@dataclass(frozen=True)
class GeometrySpec:
    primitives: tuple[Primitive, ...] = ()

    @staticmethod
    def from_obj(items: list[dict]) -> "GeometrySpec":
        """Build from the JSON-config primitive list (see docs/config_schema.md)."""
        prims: list[Primitive] = []
        for i, item in enumerate(items):
            kind = item.get("type")
            try:
                if kind == "channel":
                    prims.append(
                        Channel(
                            start=tuple(map(float, item["start"])),
                            end=tuple(map(float, item["end"])),
                            width=float(item["width"]),
                        )
                    )
                elif kind == "disc":
                    prims.append(
                        Disc(center=tuple(map(float, item["center"])), radius=float(item["radius"]))
                    )
                elif kind == "junction":
                    prims.append(
                        Junction(
                            center=tuple(map(float, item["center"])),
                            arm_length=float(item["arm_length"]),
                            arm_width=float(item["arm_width"]),
                            angles=tuple(float(a) for a in item["angles"]),
                        )
                    )
                else:
                    raise ConfigError(f"geometry primitive {i}: unknown type {kind!r}")
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"geometry primitive {i} ({kind!r}): {exc}") from exc
        return GeometrySpec(primitives=tuple(prims))


def synthesize(grid_w: int, grid_h: int, spec: GeometrySpec) -> ConductiveGrid:
    """Union of rasterized primitives; every primitive must fit in bounds."""
    if grid_w < 1 or grid_h < 1:
        raise ConfigError(f"grid dimensions {grid_w}x{grid_h} must be positive")
    mask = np.zeros((grid_h, grid_w), dtype=bool)
    for i, prim in enumerate(spec.primitives):
        x0, y0, x1, y1 = prim.bbox()
        if x0 < -0.5 or y0 < -0.5 or x1 > grid_w - 0.5 or y1 > grid_h - 0.5:
            raise ConfigError(
                f"primitive {i} ({type(prim).__name__}) footprint "
                f"[{x0:.1f},{y0:.1f}]..[{x1:.1f},{y1:.1f}] exceeds "
                f"{grid_w}x{grid_h} grid"
            )
        mask |= prim.rasterize(grid_w, grid_h)
    return ConductiveGrid(mask)


# --- electrodes -----------------------------------------------------------


@dataclass(frozen=True)
class Electrode:
    label: str
    x: int
    y: int


@dataclass(frozen=True)
class ElectrodeSet:
    electrodes: tuple[Electrode, ...]
    isolation_warnings: tuple[str, ...] = field(default=())

    def __iter__(self):
        return iter(self.electrodes)

    def __len__(self):
        return len(self.electrodes)

    def get(self, label: str) -> Electrode:
        for e in self.electrodes:
            if e.label == label:
                return e
        raise ConfigError(f"electrode {label!r} is not defined")

    def labels(self) -> list[str]:
        return [e.label for e in self.electrodes]


def place_electrodes(grid: ConductiveGrid, coords: list[tuple[str, int, int]]) -> ElectrodeSet:
    """Validate labeled positions against the grid.

    An electrode whose 3x3 neighborhood holds no conductive node is legal
    but flagged, since its potential will read identically zero.
    """
    seen: set[str] = set()
    electrodes: list[Electrode] = []
    warnings: list[str] = []
    for label, x, y in coords:
        if label in seen:
            raise ConfigError(f"duplicate electrode label {label!r}")
        seen.add(label)
        if not grid.in_bounds(int(x), int(y)):
            raise ConfigError(
                f"electrode {label!r} at ({x}, {y}) is outside the "
                f"{grid.width}x{grid.height} grid"
            )
        x, y = int(x), int(y)
        neigh = grid.mask[max(0, y - 1) : y + 2, max(0, x - 1) : x + 2]
        if not neigh.any():
            warnings.append(label)
        electrodes.append(Electrode(label=label, x=x, y=y))
    return ElectrodeSet(electrodes=tuple(electrodes), isolation_warnings=tuple(warnings))
