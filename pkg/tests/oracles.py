"""Independent reference computations used by the test-suite.

LOS is checked by dense point sampling (and by shapely clipping for the
grazing filter). The scenario maps are rebuilt by plain loops over scalar
kernel and scalar LOS calls, so they exercise the reduction logic of the
campaign without sharing its array code.
"""

import math

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon

from risplan.environment import distances, is_los, iter_cells
from risplan.propagation import (
    UmaParams,
    far_field_distance,
    ris_ffbc_pl,
    uma_pl_los,
    uma_pl_nlos,
)


def sampled_los(buildings, p0, p1, n=10_000, ground=0.0):
    """True when none of ``n`` interior sample points falls strictly inside a prism."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t = (np.arange(n) + 0.5) / n
    pts = p0 + t[:, None] * (p1 - p0)
    for b in buildings:
        shape, height = Polygon(b.footprint), b.height
        below = (pts[:, 2] > ground) & (pts[:, 2] < ground + height)
        if not below.any():
            continue
        inside = shapely.contains_xy(shape, pts[below, 0], pts[below, 1])
        if inside.any():
            return False
    return True


def _exact_blocked(shape: Polygon, z_lo: float, z_hi: float, p0, p1) -> bool:
    """Clip the 2D projection with shapely, then check the z-range of each piece."""
    line = LineString([p0[:2], p1[:2]])
    length = line.length
    if length == 0:
        return bool(shape.contains(shapely.Point(p0[:2]))) and min(p0[2], p1[2]) < z_hi
    inter = line.intersection(shape)
    pieces = getattr(inter, "geoms", [inter])
    for piece in pieces:
        if piece.is_empty or piece.length <= 0:
            continue
        ts = [line.project(shapely.Point(c)) / length for c in piece.coords]
        za = p0[2] + min(ts) * (p1[2] - p0[2])
        zb = p0[2] + max(ts) * (p1[2] - p0[2])
        if min(za, zb) < z_hi and max(za, zb) > z_lo:
            return True
    return False


def is_grazing(buildings, p0, p1, margin=1e-3, ground=0.0) -> bool:
    """Segment outcome changes when every prism is eroded or dilated by ``margin``."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    for b in buildings:
        poly = Polygon(b.footprint)
        eroded = poly.buffer(-margin, join_style="mitre")
        dilated = poly.buffer(margin, join_style="mitre")
        top = ground + b.height
        hit_in = (not eroded.is_empty) and _exact_blocked(eroded, ground + margin, top - margin, p0, p1)
        hit_out = _exact_blocked(dilated, ground - margin, top + margin, p0, p1)
        if hit_in != hit_out:
            return True
    return False


def brute_force_ris_map(scene, sites, candidates, grid, panel, angles):
    """Pointwise min over every (MP, cell, path) triple, by scalar loops."""
    g = scene.ground_height
    xs = grid.x_centers()
    ys = grid.y_centers()
    out = np.empty(grid.shape)
    bs = np.empty(grid.shape)
    cells = list(iter_cells(sites))
    site_pts = [s.point(g) for s in sites]
    ris_pts = [c.point(g) for c in candidates]
    hop1 = {(si, j): is_los(scene, site_pts[si], r) for si in range(len(sites)) for j, r in enumerate(ris_pts)}
    for iy in range(grid.Y):
        for ix in range(grid.X):
            mp = np.array([xs[ix], ys[iy], g + grid.rx_height])
            direct_clear = [is_los(scene, p, mp) for p in site_pts]
            hop2 = [is_los(scene, r, mp) for r in ris_pts]
            best = math.inf
            best_direct = math.inf
            for _, s_idx, cell in cells:
                site = sites[s_idx]
                bs_pt = site_pts[s_idx]
                params = UmaParams(fc=cell.frequency / 1000.0, h_bs=site.antenna_height, h_ut=grid.rx_height)
                d2d, _ = distances(bs_pt, mp)
                if direct_clear[s_idx]:
                    direct = uma_pl_los(d2d, params)
                else:
                    direct = uma_pl_nlos(d2d, params)
                best_direct = min(best_direct, direct)
                best = min(best, direct)
                lam = 299_792_458.0 / (cell.frequency * 1e6)
                ff = far_field_distance(panel, lam)
                for j, r in enumerate(ris_pts):
                    _, d1 = distances(bs_pt, r)
                    _, d2 = distances(r, mp)
                    if d1 <= ff or d2 <= ff:
                        continue
                    if not (hop1[s_idx, j] and hop2[j]):
                        continue
                    best = min(best, ris_ffbc_pl(d1, d2, lam, panel, angles))
            out[iy, ix] = best
            bs[iy, ix] = best_direct
    return out, bs
