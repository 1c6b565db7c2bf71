"""Scenario path-loss maps built from per-path evaluations.

Four scenarios are produced over a measurement grid:

* ``BS``      best direct (LOS or NLOS) path over all cells
* ``RIS``     best of direct and RIS-reflected paths
* ``AVG``     mean of the BS and RIS maps in dB
* ``RIS_BS``  best direct and best RIS-reflected signals summed in milliwatts

Map arrays are indexed ``[y, x]``. Unreachable points hold ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .environment import (
    ConfigurationError,
    MeasurementGrid,
    RisPlacement,
    Scene,
    SiteConfig,
    distances,
    iter_cells,
    los_mask,
)
from .propagation import (
    BeamAngles,
    RisPanel,
    UmaParams,
    far_field_distance,
    ris_ffbc_pl,
    uma_pl_los,
    uma_pl_nlos,
)

SCENARIOS = ("BS", "RIS", "RIS_BS", "AVG")

KIND_NONE, KIND_LOS, KIND_NLOS, KIND_RIS = 0, 1, 2, 3
_KIND_NAMES = {KIND_LOS: "LOS", KIND_NLOS: "NLOS"}


class DimensionError(ValueError):
    pass


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(mw, dtype=float))


@dataclass(eq=False)
class PathLossMap:
    """One scenario raster with per-point provenance.

    ``cell`` and ``ris`` hold the global cell index / RIS id of the winning
    path (-1 when absent); ``kind`` is one of the ``KIND_*`` codes.
    """

    grid: MeasurementGrid
    scenario: str
    values: np.ndarray
    cell: np.ndarray
    ris: np.ndarray
    kind: np.ndarray

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        shape = self.grid.shape
        for name in ("values", "cell", "ris", "kind"):
            arr = np.asarray(getattr(self, name)).reshape(shape)
            setattr(self, name, arr)

    def source_tags(self) -> np.ndarray:
        """String tag per MP: ``BS:cell<i>:LOS``, ``RIS:cell<i>:ris<j>`` or ``NONE``."""
        tags = np.full(self.grid.shape, "NONE", dtype=object)
        for idx in np.ndindex(self.grid.shape):
            k = int(self.kind[idx])
            if k == KIND_RIS:
                tags[idx] = f"RIS:cell{int(self.cell[idx])}:ris{int(self.ris[idx])}"
            elif k in _KIND_NAMES:
                tags[idx] = f"BS:cell{int(self.cell[idx])}:{_KIND_NAMES[k]}"
        return tags


@dataclass(frozen=True)
class PathSample:
    """Path losses of one cell toward one MP."""

    cell_id: int
    pl_los: float | None = None
    pl_nlos: float | None = None
    pl_ris: float | None = None
    ris_id: int | None = None

    @property
    def best(self) -> float:
        vals = [v for v in (self.pl_los, self.pl_nlos, self.pl_ris) if v is not None]
        return min(vals) if vals else math.inf


class PropagationContext:
    """Per-scene precomputation shared by every map and candidate evaluation.

    Holds MP coordinates, per-site visibility and the direct path loss of
    every cell. Read-only after construction, so candidate evaluations can
    run concurrently against one instance.
    """

    def __init__(
        self,
        scene: Scene,
        sites: Sequence[SiteConfig],
        grid: MeasurementGrid,
        panel: RisPanel | None = None,
        angles: BeamAngles | None = None,
    ):
        cells = list(iter_cells(sites))
        if not cells:
            raise ConfigurationError("at least one site with one cell is required")
        self.scene = scene
        self.sites = tuple(sites)
        self.grid = grid
        self.panel = panel or RisPanel()
        self.angles = angles or BeamAngles()
        self.cells = cells
        g = scene.ground_height
        self.mp = grid.points(g)
        self.site_points = [s.point(g) for s in self.sites]

        self.site_los = [los_mask(scene, p, self.mp) for p in self.site_points]
        self.site_d2d = [distances(p, self.mp)[0] for p in self.site_points]

        n = grid.size
        self.direct_pl = np.empty((len(cells), n))
        self.direct_los = np.empty((len(cells), n), dtype=bool)
        self.wavelengths = np.empty(len(cells))
        self.far_field = np.empty(len(cells))
        for k, s_idx, cell in cells:
            site = self.sites[s_idx]
            params = UmaParams(fc=cell.frequency_ghz, h_bs=site.antenna_height, h_ut=grid.rx_height)
            los = self.site_los[s_idx]
            d2d = self.site_d2d[s_idx]
            pl = np.empty(n)
            pl[los] = uma_pl_los(d2d[los], params)
            pl[~los] = uma_pl_nlos(d2d[~los], params)
            self.direct_pl[k] = pl
            self.direct_los[k] = los
            self.wavelengths[k] = cell.wavelength
            self.far_field[k] = far_field_distance(self.panel, cell.wavelength)

    @property
    def tx_powers(self) -> list[float]:
        return [cell.tx_power for _, _, cell in self.cells]

    def best_direct(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(pl, cell, kind) of the best direct path per MP; ties go to the lowest cell."""
        best = np.argmin(self.direct_pl, axis=0)
        cols = np.arange(self.grid.size)
        pl = self.direct_pl[best, cols]
        kind = np.where(self.direct_los[best, cols], KIND_LOS, KIND_NLOS)
        return pl, best, kind

    def ris_paths(self, candidate: RisPlacement) -> tuple[np.ndarray, np.ndarray]:
        """Best RIS-reflected path per MP through one placement.

        Returns (pl, cell) with ``+inf`` / -1 where no cell has a valid path:
        both hops must be unobstructed and beyond the far-field distance.
        """
        ris_pt = candidate.point(self.scene.ground_height)
        hop2_clear = los_mask(self.scene, ris_pt, self.mp)
        d2 = distances(ris_pt, self.mp)[1]
        n = self.grid.size
        best = np.full(n, np.inf)
        best_cell = np.full(n, -1, dtype=np.int64)
        hop1: dict[int, tuple[bool, float]] = {}
        for k, s_idx, _ in self.cells:
            if s_idx not in hop1:
                sp = self.site_points[s_idx]
                d1 = distances(sp, ris_pt)[1]
                clear = d1 > 0 and bool(los_mask(self.scene, sp, ris_pt)[0])
                hop1[s_idx] = (clear, d1)
            clear1, d1 = hop1[s_idx]
            ff = self.far_field[k]
            if not clear1 or d1 <= ff:
                continue
            ok = hop2_clear & (d2 > ff)
            if not ok.any():
                continue
            pl = np.full(n, np.inf)
            pl[ok] = ris_ffbc_pl(d1, d2[ok], self.wavelengths[k], self.panel, self.angles)
            better = pl < best
            best = np.where(better, pl, best)
            best_cell = np.where(better, k, best_cell)
        return best, best_cell


def _flat_map(ctx: PropagationContext, scenario, values, cell, ris, kind) -> PathLossMap:
    return PathLossMap(ctx.grid, scenario, values, cell, ris, kind)


def _context(scene, sites, grid, panel, angles) -> PropagationContext:
    if isinstance(scene, PropagationContext):
        return scene
    return PropagationContext(scene, sites, grid, panel, angles)


def bs_map_from(ctx: PropagationContext) -> PathLossMap:
    pl, cell, kind = ctx.best_direct()
    return _flat_map(ctx, "BS", pl, cell, np.full(ctx.grid.size, -1), kind)


def best_ris_only(ctx: PropagationContext, candidates: Sequence[RisPlacement]):
    """Pointwise best RIS path over all placements: (pl, cell, ris)."""
    n = ctx.grid.size
    pl = np.full(n, np.inf)
    cell = np.full(n, -1, dtype=np.int64)
    ris = np.full(n, -1, dtype=np.int64)
    for cand in sorted(candidates, key=lambda c: c.ris_id):
        c_pl, c_cell = ctx.ris_paths(cand)
        pl, cell, ris = merge_ris_best((pl, cell, ris), (c_pl, c_cell, cand.ris_id))
    return pl, cell, ris


def merge_ris_best(acc, new):
    """Fold one placement's (pl, cell, ris_id) into a running best.

    Must be applied in increasing ris id; ties keep the lower cell, then the
    earlier (lower) ris id.
    """
    pl, cell, ris = acc
    c_pl, c_cell, ris_id = new
    better = (c_pl < pl) | ((c_pl == pl) & np.isfinite(c_pl) & (c_cell < cell))
    return (
        np.where(better, c_pl, pl),
        np.where(better, c_cell, cell),
        np.where(better, ris_id, ris),
    )


def compose_ris(ctx: PropagationContext, ris_pl, ris_cell, ris_id) -> PathLossMap:
    """Min over direct and RIS paths; ties go to the lower cell, direct first."""
    bs_pl, bs_cell, bs_kind = ctx.best_direct()
    use_ris = (ris_pl < bs_pl) | ((ris_pl == bs_pl) & (ris_cell < bs_cell) & (ris_cell >= 0))
    return _flat_map(
        ctx,
        "RIS",
        np.where(use_ris, ris_pl, bs_pl),
        np.where(use_ris, ris_cell, bs_cell),
        np.where(use_ris, ris_id, -1),
        np.where(use_ris, KIND_RIS, bs_kind),
    )


def reinforce(pl_bs, pl_ris, p_tx_avg: float):
    """Effective path loss of the direct and RIS signals summed in milliwatts."""
    pl_bs = np.asarray(pl_bs, dtype=float)
    pl_ris = np.asarray(pl_ris, dtype=float)
    p_bs = dbm_to_mw(received_power(p_tx_avg, pl_bs))
    p_ris = dbm_to_mw(received_power(p_tx_avg, pl_ris))
    combined = p_tx_avg - mw_to_dbm(p_ris + p_bs)
    # summing power can only lower the loss; guard the last ulp of the dB round trip
    combined = np.minimum(combined, np.minimum(pl_bs, pl_ris))
    out = np.where(np.isinf(pl_ris), pl_bs, np.where(np.isinf(pl_bs), pl_ris, combined))
    return float(out) if out.ndim == 0 else out


def compose_reinforced(ctx: PropagationContext, ris_pl, ris_cell, ris_id, p_tx_avg: float) -> PathLossMap:
    bs_pl, bs_cell, bs_kind = ctx.best_direct()
    values = reinforce(bs_pl, ris_pl, p_tx_avg)
    ris_dominant = ris_pl < bs_pl
    return _flat_map(
        ctx,
        "RIS_BS",
        values,
        np.where(ris_dominant, ris_cell, bs_cell),
        np.where(ris_dominant, ris_id, -1),
        np.where(ris_dominant, KIND_RIS, bs_kind),
    )


def map_bs(scene, sites, grid, panel=None, angles=None) -> PathLossMap:
    """Best direct path loss per MP over all cells (RIS disabled)."""
    return bs_map_from(_context(scene, sites, grid, panel, angles))


def map_ris(scene, sites, candidates, grid, panel=None, angles=None) -> PathLossMap:
    ctx = _context(scene, sites, grid, panel, angles)
    return compose_ris(ctx, *best_ris_only(ctx, candidates))


def map_avg(mbs: PathLossMap, mris: PathLossMap) -> PathLossMap:
    """Arithmetic mean of the BS and RIS maps, taken on the dB values."""
    if mbs.grid != mris.grid or mbs.values.shape != mris.values.shape:
        raise DimensionError("maps are defined on different grids")
    if mbs.scenario != "BS" or mris.scenario != "RIS":
        raise ValueError("map_avg expects a BS map and a RIS map")
    values = (mris.values + mbs.values) / 2.0
    return PathLossMap(mbs.grid, "AVG", values, mris.cell.copy(), mris.ris.copy(), mris.kind.copy())


def avg_transmit_power(cells) -> float:
    """Mean transmit power in dBm over cells (the dBm values themselves are averaged)."""
    powers = [c.tx_power if hasattr(c, "tx_power") else float(c) for c in cells]
    if not powers:
        raise ConfigurationError("no cells to average transmit power over")
    return math.fsum(powers) / len(powers)


def received_power(p_tx_avg: float, pl):
    """P_RX = P_TX - PL; an infinite loss yields -inf (no coverage)."""
    pl_arr = np.asarray(pl, dtype=float)
    out = np.where(np.isinf(pl_arr), -np.inf, p_tx_avg - pl_arr)
    return float(out) if out.ndim == 0 else out


def map_reinforced(scene, sites, candidates, grid, p_tx_avg: float | None = None,
                   panel=None, angles=None) -> PathLossMap:
    ctx = _context(scene, sites, grid, panel, angles)
    if p_tx_avg is None:
        p_tx_avg = avg_transmit_power(ctx.tx_powers)
    return compose_reinforced(ctx, *best_ris_only(ctx, candidates), p_tx_avg)
