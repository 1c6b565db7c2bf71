"""Planar urban scene: buildings, measurement raster, sites and RIS candidates.

All coordinates are local planar meters. Buildings are vertical prisms
standing on flat ground; line-of-sight is decided by exact segment/prism
intersection, vectorised over many segments at once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import shapely
from shapely.geometry import Polygon

# numerical slack for degenerate (parallel / zero-length) geometry
_EPS = 1e-12

BS_HEIGHT_RANGE = (27.0, 47.0)


class InvalidSceneError(ValueError):
    """Raised when a scene or one of its buildings breaks an invariant."""


class ConfigurationError(ValueError):
    """Raised for inconsistent site, cell or run configuration."""


@dataclass(frozen=True, eq=False)
class Building:
    footprint: np.ndarray  # (E, 2), counterclockwise, not closed
    height: float

    def __post_init__(self):
        pts = np.asarray(self.footprint, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidSceneError("footprint must be an (E, 2) array of vertices")
        if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 3:
            raise InvalidSceneError("footprint needs at least 3 distinct vertices")
        if not (np.isfinite(self.height) and self.height > 0):
            raise InvalidSceneError(f"building height must be > 0, got {self.height}")
        poly = Polygon(pts)
        if not poly.is_valid or poly.area <= 0:
            raise InvalidSceneError("footprint is not a simple polygon")
        if not poly.exterior.is_ccw:
            pts = pts[::-1]
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "footprint", pts)
        object.__setattr__(self, "height", float(self.height))

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        xmin, ymin = self.footprint.min(axis=0)
        xmax, ymax = self.footprint.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)

    @property
    def polygon(self) -> Polygon:
        return Polygon(self.footprint)


@dataclass(frozen=True, eq=False)
class Scene:
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    buildings: tuple[Building, ...] = ()
    ground_height: float = 0.0

    def __post_init__(self):
        xmin, ymin, xmax, ymax = (float(v) for v in self.bounds)
        if not (xmax > xmin and ymax > ymin):
            raise InvalidSceneError(f"degenerate scene bounds {self.bounds}")
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))
        object.__setattr__(self, "buildings", tuple(self.buildings))
        bad = []
        for k, b in enumerate(self.buildings):
            bx0, by0, bx1, by1 = b.bbox
            if bx0 < xmin or by0 < ymin or bx1 > xmax or by1 > ymax:
                bad.append(k)
        if bad:
            raise InvalidSceneError(f"buildings outside scene bounds: {bad}")

    @property
    def width(self) -> float:
        return self.bounds[2] - self.bounds[0]

    @property
    def depth(self) -> float:
        return self.bounds[3] - self.bounds[1]

    @property
    def max_height(self) -> float:
        return max((b.height for b in self.buildings), default=0.0) + self.ground_height

    def contains_xy(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xmin, ymin, xmax, ymax = self.bounds
        return (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)

    def footprint_mask(self, x, y) -> np.ndarray:
        """True where (x, y) lies inside (or on) any building footprint."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        mask = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for b in self.buildings:
            mask |= shapely.intersects_xy(b.polygon, x, y)
        return mask

    def height_at(self, x, y) -> np.ndarray:
        """Object height above ground at (x, y); 0 outside all footprints."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for b in self.buildings:
            inside = shapely.intersects_xy(b.polygon, x, y)
            out = np.where(inside, np.maximum(out, b.height), out)
        return out


@dataclass(frozen=True)
class MeasurementGrid:
    """Raster of measurement points (MPs).

    ``origin`` is the lower-left corner of cell (0, 0); MP (x, y) sits at the
    centre of its cell. Arrays over the grid are indexed ``[y, x]``.
    """

    origin: tuple[float, float]
    resolution: float
    X: int
    Y: int
    rx_height: float = 1.5

    def __post_init__(self):
        if self.X < 1 or self.Y < 1:
            raise ValueError("grid needs X >= 1 and Y >= 1")
        if not self.resolution > 0:
            raise ValueError("grid resolution must be > 0")
        if not self.rx_height > 0:
            raise ValueError("receiver height must be > 0")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Y, self.X)

    @property
    def size(self) -> int:
        return self.X * self.Y

    def x_centers(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.X) + 0.5) * self.resolution

    def y_centers(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.Y) + 0.5) * self.resolution

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(xx, yy) arrays of shape (Y, X)."""
        return np.meshgrid(self.x_centers(), self.y_centers())

    def points(self, ground_height: float = 0.0) -> np.ndarray:
        """MP positions as an (Y*X, 3) array, y-major (row 0 first)."""
        xx, yy = self.mesh()
        zz = np.full(xx.shape, ground_height + self.rx_height)
        return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)


@dataclass(frozen=True)
class CellConfig:
    frequency: float  # MHz
    bandwidth: float = 0.0  # MHz
    tx_power: float = 43.0  # dBm
    antenna_gain: float = 0.0  # dBi
    feeder_loss: float = 0.0  # dB
    antenna_elements: int = 1
    # stored for completeness, not used by the path-loss engine
    used_subcarriers: float | None = None
    total_subcarriers: float | None = None
    sampling_factor: float | None = None
    pilot_reuse: float | None = None
    coherence_time: float | None = None
    coherence_bandwidth: float | None = None
    spatial_duty_cycle: float | None = None
    noise_figure: float | None = None
    interference_margin: float | None = None
    doppler_margin: float | None = None
    fade_margin: float | None = None
    shadow_margin: float | None = None
    implementation_loss: float | None = None

    def __post_init__(self):
        if not self.frequency > 0:
            raise ConfigurationError(f"cell frequency must be > 0 MHz, got {self.frequency}")
        if not math.isfinite(self.tx_power):
            raise ConfigurationError("cell tx_power must be finite")

    @property
    def frequency_ghz(self) -> float:
        return self.frequency / 1000.0

    @property
    def wavelength(self) -> float:
        return 299_792_458.0 / (self.frequency * 1e6)


@dataclass(frozen=True)
class SiteConfig:
    site_id: str
    position: tuple[float, float]
    antenna_height: float
    cells: tuple[CellConfig, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if not self.antenna_height > 0:
            raise ConfigurationError(f"site {self.site_id}: antenna height must be > 0")

    def point(self, ground_height: float = 0.0) -> np.ndarray:
        return np.array([self.position[0], self.position[1], ground_height + self.antenna_height])


def check_site_heights(sites: Sequence[SiteConfig]) -> list[str]:
    """Warn about antenna heights outside the 27-47 m range used by the reference scenario."""
    lo, hi = BS_HEIGHT_RANGE
    off = [s.site_id for s in sites if not lo <= s.antenna_height <= hi]
    for sid in off:
        warnings.warn(f"site {sid}: antenna height outside [{lo}, {hi}] m", stacklevel=2)
    return off


def iter_cells(sites: Sequence[SiteConfig]) -> Iterator[tuple[int, int, CellConfig]]:
    """Yield (global cell index, site index, cell) in site order then cell order."""
    k = 0
    for s_idx, site in enumerate(sites):
        for cell in site.cells:
            yield k, s_idx, cell
            k += 1


@dataclass(frozen=True)
class RisPlacement:
    ris_id: int
    position: tuple[float, float]
    height: float

    def point(self, ground_height: float = 0.0) -> np.ndarray:
        return np.array([self.position[0], self.position[1], ground_height + self.height])


def build_grid(scene: Scene, resolution: float = 5.0, rx_height: float = 1.5) -> MeasurementGrid:
    """Raster covering the scene with ``ceil(extent / resolution)`` cells per axis.

    When the extent is not a multiple of the resolution the raster overhangs
    both edges equally, which keeps every MP centre inside the bounds.
    """
    if not resolution > 0:
        raise ValueError("resolution must be > 0")
    xmin, ymin, _, _ = scene.bounds
    X = max(1, math.ceil(scene.width / resolution))
    Y = max(1, math.ceil(scene.depth / resolution))
    ox = xmin - (X * resolution - scene.width) / 2.0
    oy = ymin - (Y * resolution - scene.depth) / 2.0
    return MeasurementGrid(origin=(ox, oy), resolution=float(resolution), X=X, Y=Y, rx_height=rx_height)


def generate_ris_candidates(scene: Scene, rows: int, cols: int, h_ris: float) -> list[RisPlacement]:
    """Centres of a uniform rows x cols partition of the bounds.

    Ids run row-major from the bottom-left cell, left to right, then upward.
    ``rows == 0`` or ``cols == 0`` disables RIS and yields an empty list.
    """
    if rows < 0 or cols < 0:
        raise ValueError("rows and cols must be non-negative")
    xmin, ymin, _, _ = scene.bounds
    dx = scene.width / cols if cols else 0.0
    dy = scene.depth / rows if rows else 0.0
    out = []
    for r in range(rows):
        for c in range(cols):
            out.append(
                RisPlacement(
                    ris_id=r * cols + c,
                    position=(xmin + (c + 0.5) * dx, ymin + (r + 0.5) * dy),
                    height=float(h_ris),
                )
            )
    return out


def distances(p_a, p_b) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and full 3D Euclidean distances (broadcasting over leading axes)."""
    a = np.asarray(p_a, dtype=float)
    b = np.asarray(p_b, dtype=float)
    dx = b[..., 0] - a[..., 0]
    dy = b[..., 1] - a[..., 1]
    dz = b[..., 2] - a[..., 2]
    d2 = np.sqrt(dx * dx + dy * dy)
    d3 = np.sqrt(dx * dx + dy * dy + dz * dz)
    if d2.ndim == 0:
        return float(d2), float(d3)
    return d2, d3


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _inside_polygon(px: np.ndarray, py: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd crossing test, broadcast over arbitrary point arrays."""
    vx, vy = poly[:, 0], poly[:, 1]
    wx, wy = np.roll(vx, -1), np.roll(vy, -1)
    px = px[..., None]
    py = py[..., None]
    straddles = (vy > py) != (wy > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = vx + (py - vy) * (wx - vx) / (wy - vy)
    crossings = straddles & (px < x_at)
    return (np.count_nonzero(crossings, axis=-1) % 2) == 1


def _blocked_by(building: Building, p0: np.ndarray, p1: np.ndarray, ground: float) -> np.ndarray:
    """Which segments p0[k] -> p1[k] pass through the interior of ``building``."""
    n = len(p0)
    blocked = np.zeros(n, dtype=bool)
    top = ground + building.height
    bx0, by0, bx1, by1 = building.bbox
    cand = (
        (np.minimum(p0[:, 2], p1[:, 2]) < top)
        & (np.maximum(p0[:, 0], p1[:, 0]) > bx0)
        & (np.minimum(p0[:, 0], p1[:, 0]) < bx1)
        & (np.maximum(p0[:, 1], p1[:, 1]) > by0)
        & (np.minimum(p0[:, 1], p1[:, 1]) < by1)
    )
    idx = np.flatnonzero(cand)
    if idx.size == 0:
        return blocked
    a = p0[idx]
    b = p1[idx]
    ax, ay = a[:, 0:1], a[:, 1:2]
    dx, dy = b[:, 0:1] - ax, b[:, 1:2] - ay

    poly = building.footprint
    qx, qy = poly[:, 0], poly[:, 1]
    sx, sy = np.roll(qx, -1) - qx, np.roll(qy, -1) - qy

    # parameter t along each segment where it crosses each footprint edge
    denom = _cross(dx, dy, sx, sy)
    rx, ry = qx - ax, qy - ay
    ok = np.abs(denom) > _EPS
    safe = np.where(ok, denom, 1.0)
    t = _cross(rx, ry, sx, sy) / safe
    u = _cross(rx, ry, dx, dy) / safe
    hit = ok & (t > 0.0) & (t < 1.0) & (u >= 0.0) & (u <= 1.0)
    ts = np.where(hit, t, np.nan)

    m = len(idx)
    ts = np.concatenate([np.zeros((m, 1)), ts, np.ones((m, 1))], axis=1)
    ts.sort(axis=1)  # NaNs go last
    t_lo, t_hi = ts[:, :-1], ts[:, 1:]
    valid = np.isfinite(t_hi) & (t_hi - t_lo > _EPS)
    tm = np.where(valid, 0.5 * (t_lo + t_hi), 0.0)

    inside = _inside_polygon(ax + tm * dx, ay + tm * dy, poly) & valid
    z0 = a[:, 2:3]
    dz = b[:, 2:3] - z0
    z_lo = z0 + t_lo * dz
    z_hi = z0 + np.where(valid, t_hi, 0.0) * dz
    under_roof = np.minimum(z_lo, z_hi) < top
    blocked[idx] = np.any(inside & under_roof, axis=1)
    return blocked


def los_mask(scene: Scene, p_from, p_to) -> np.ndarray:
    """Vectorised line-of-sight test.

    ``p_from`` and ``p_to`` are (3,) or (N, 3) and broadcast against each
    other. Returns a bool array of length N: True where the open segment
    meets no building interior. Touching a wall, roof or edge is not
    blockage.
    """
    a = np.atleast_2d(np.asarray(p_from, dtype=float))
    b = np.atleast_2d(np.asarray(p_to, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    clear = np.ones(len(a), dtype=bool)
    for building in scene.buildings:
        clear &= ~_blocked_by(building, a, b, scene.ground_height)
    return clear


def is_los(scene: Scene, p_tx, p_rx) -> bool:
    p_tx = np.asarray(p_tx, dtype=float)
    p_rx = np.asarray(p_rx, dtype=float)
    if np.array_equal(p_tx, p_rx):
        raise ValueError("line-of-sight undefined for coincident points")
    if p_tx[2] < scene.ground_height or p_rx[2] < scene.ground_height:
        raise ValueError("points must lie above ground")
    return bool(los_mask(scene, p_tx, p_rx)[0])
