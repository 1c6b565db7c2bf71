"""Input loading (GeoJSON scene, site/cell CSVs) and output writing (CSV, PNG, JSON)."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .composition import KIND_LOS, KIND_NLOS, KIND_NONE, KIND_RIS, SCENARIOS, PathLossMap
from .environment import (
    Building,
    CellConfig,
    ConfigurationError,
    InvalidSceneError,
    MeasurementGrid,
    Scene,
    SiteConfig,
)
from .metrics import GainReport, SummaryStats, cdf, gains

GREEN = (0, 255, 0)
RED = (255, 0, 0)
WHITE = (255, 255, 255)
PURPLE = (128, 0, 128)
NO_COVERAGE = (0, 0, 0)


class SceneValidationError(InvalidSceneError):
    def __init__(self, problems: dict[int, str]):
        self.problems = problems
        detail = "; ".join(f"feature {k}: {msg}" for k, msg in sorted(problems.items()))
        super().__init__(f"invalid features [{', '.join(map(str, sorted(problems)))}]: {detail}")


# ---------------------------------------------------------------- loading

def load_scene(path) -> Scene:
    """Read a GeoJSON FeatureCollection of Polygon footprints with a numeric ``height``.

    Bounds come from the top-level ``bbox``; without one the envelope of the
    footprints is used.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidSceneError(f"{path}: not valid JSON ({exc})") from exc
    if doc.get("type") != "FeatureCollection":
        raise InvalidSceneError(f"{path}: expected a FeatureCollection")

    buildings = []
    problems: dict[int, str] = {}
    for k, feat in enumerate(doc.get("features", [])):
        geom = feat.get("geometry") or {}
        props = feat.get("properties") or {}
        if geom.get("type") != "Polygon":
            problems[k] = f"geometry type {geom.get('type')!r} is not Polygon"
            continue
        rings = geom.get("coordinates") or []
        if len(rings) != 1:
            problems[k] = "polygon must have exactly one (outer) ring"
            continue
        height = props.get("height")
        if not isinstance(height, (int, float)) or isinstance(height, bool):
            problems[k] = "missing numeric 'height' property"
            continue
        try:
            coords = np.asarray([c[:2] for c in rings[0]], dtype=float)
            buildings.append(Building(coords, float(height)))
        except (InvalidSceneError, ValueError, IndexError) as exc:
            problems[k] = str(exc)
    if problems:
        raise SceneValidationError(problems)

    bbox = doc.get("bbox")
    if bbox is None:
        if not buildings:
            raise InvalidSceneError(f"{path}: no bbox and no features to derive bounds from")
        allpts = np.concatenate([b.footprint for b in buildings])
        bbox = [*allpts.min(axis=0), *allpts.max(axis=0)]
    elif len(bbox) == 6:
        bbox = [bbox[0], bbox[1], bbox[3], bbox[4]]
    elif len(bbox) != 4:
        raise InvalidSceneError(f"{path}: bbox must have 4 (or 6) numbers")
    return Scene(bounds=tuple(float(v) for v in bbox), buildings=tuple(buildings))


def scene_to_geojson(scene: Scene) -> dict:
    feats = []
    for b in scene.buildings:
        ring = [[float(x), float(y)] for x, y in b.footprint]
        ring.append(ring[0])
        feats.append({
            "type": "Feature",
            "properties": {"height": b.height},
            "geometry": {"type": "Polygon", "coordinates": [ring]},
        })
    return {"type": "FeatureCollection", "bbox": list(scene.bounds), "features": feats}


_CELL_COLUMNS = {
    "freq_mhz": "frequency",
    "bw_mhz": "bandwidth",
    "tx_dbm": "tx_power",
    "gain_dbi": "antenna_gain",
    "feeder_db": "feeder_loss",
    "elements": "antenna_elements",
}
_CELL_EXTRAS = {f.name for f in dataclasses.fields(CellConfig)} - set(_CELL_COLUMNS.values())


def load_sites(sites_path, cells_path) -> list[SiteConfig]:
    """Read ``site_id,x,y,h_bs`` and the per-cell table, joined on ``site_id``."""
    sites_path, cells_path = Path(sites_path), Path(cells_path)
    with sites_path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    need = {"site_id", "x", "y", "h_bs"}
    if rows and not need <= set(rows[0]):
        raise ConfigurationError(f"{sites_path}: header must contain {sorted(need)}")

    with cells_path.open(newline="") as fh:
        cell_rows = list(csv.DictReader(fh))
    need_c = {"site_id", *_CELL_COLUMNS}
    if cell_rows and not need_c <= set(cell_rows[0]):
        raise ConfigurationError(f"{cells_path}: header must contain {sorted(need_c)}")

    cells_by_site: dict[str, list[CellConfig]] = {}
    for n, row in enumerate(cell_rows, start=2):
        try:
            kw = {field: float(row[col]) for col, field in _CELL_COLUMNS.items()}
            kw["antenna_elements"] = int(kw["antenna_elements"])
            for extra in _CELL_EXTRAS:
                if row.get(extra) not in (None, ""):
                    kw[extra] = float(row[extra])
            cell = CellConfig(**kw)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"{cells_path}:{n}: {exc}") from exc
        cells_by_site.setdefault(row["site_id"].strip(), []).append(cell)

    sites = []
    seen = set()
    for n, row in enumerate(rows, start=2):
        sid = row["site_id"].strip()
        if sid in seen:
            raise ConfigurationError(f"{sites_path}:{n}: duplicate site_id {sid!r}")
        seen.add(sid)
        try:
            sites.append(SiteConfig(
                site_id=sid,
                position=(float(row["x"]), float(row["y"])),
                antenna_height=float(row["h_bs"]),
                cells=tuple(cells_by_site.get(sid, ())),
            ))
        except ValueError as exc:
            raise ConfigurationError(f"{sites_path}:{n}: {exc}") from exc
    orphans = set(cells_by_site) - seen
    if orphans:
        raise ConfigurationError(f"{cells_path}: cells reference unknown sites {sorted(orphans)}")
    return sites


def write_sites(sites: Sequence[SiteConfig], sites_path, cells_path) -> None:
    with Path(sites_path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site_id", "x", "y", "h_bs"])
        for s in sites:
            w.writerow([s.site_id, repr(s.position[0]), repr(s.position[1]), repr(s.antenna_height)])
    with Path(cells_path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        extras = sorted(_CELL_EXTRAS)
        w.writerow(["site_id", *_CELL_COLUMNS, *extras])
        for s in sites:
            for c in s.cells:
                main = [getattr(c, f) for f in _CELL_COLUMNS.values()]
                rest = ["" if getattr(c, f) is None else getattr(c, f) for f in extras]
                w.writerow([s.site_id, *main, *rest])


# ---------------------------------------------------------------- map CSV

def _fmt_db(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.4f}"


def write_map_csv(pl_map: PathLossMap, path) -> None:
    """Rows ``x,y,pl_db,source`` ordered by y then x, dB to 4 decimals."""
    tags = pl_map.source_tags()
    vals = pl_map.values
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "pl_db", "source"])
        for y in range(pl_map.grid.Y):
            for x in range(pl_map.grid.X):
                v = float(vals[y, x])
                w.writerow([x, y, _fmt_db(v), "NONE" if math.isinf(v) else tags[y, x]])


def _parse_tag(tag: str) -> tuple[int, int, int]:
    if tag == "NONE":
        return -1, -1, KIND_NONE
    parts = tag.split(":")
    cell = int(parts[1].removeprefix("cell"))
    if parts[0] == "RIS":
        return cell, int(parts[2].removeprefix("ris")), KIND_RIS
    return cell, -1, KIND_LOS if parts[2] == "LOS" else KIND_NLOS


def read_map_csv(path, grid: MeasurementGrid, scenario: str = "BS") -> PathLossMap:
    values = np.full(grid.shape, np.nan)
    cell = np.full(grid.shape, -1, dtype=np.int64)
    ris = np.full(grid.shape, -1, dtype=np.int64)
    kind = np.zeros(grid.shape, dtype=np.int64)
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            x, y = int(row["x"]), int(row["y"])
            values[y, x] = float(row["pl_db"])
            cell[y, x], ris[y, x], kind[y, x] = _parse_tag(row["source"])
    if np.isnan(values).any():
        raise ValueError(f"{path}: does not cover the whole grid")
    return PathLossMap(grid, scenario, values, cell, ris, kind)


# ---------------------------------------------------------------- heatmaps

@dataclass(frozen=True)
class ColorScale:
    kind: str
    stops: tuple[tuple[float, tuple[int, int, int]], ...]

    def colors(self, values) -> np.ndarray:
        """Piecewise-linear RGB lookup, clamped at the end stops; returns uint8 (..., 3)."""
        v = np.asarray(values, dtype=float)
        xs = np.array([s[0] for s in self.stops])
        rgb = np.array([s[1] for s in self.stops], dtype=float)
        finite = np.isfinite(v)
        vv = np.where(finite, v, xs[0])
        out = np.stack([np.interp(vv, xs, rgb[:, ch]) for ch in range(3)], axis=-1)
        out = np.rint(out).astype(np.uint8)
        out[~finite] = NO_COVERAGE
        return out


PATHLOSS_SCALE = ColorScale("pathloss", ((60.0, GREEN), (90.0, RED)))
HEIGHT_SCALE = ColorScale("height", ((10.0, WHITE), (45.0, PURPLE)))


def render_rgb(pl_map: PathLossMap, scale: ColorScale = PATHLOSS_SCALE,
               scene: Scene | None = None, overlay: bool = False) -> np.ndarray:
    """(Y, X, 3) image with row 0 at the top, i.e. map y flipped to point upward."""
    if scale.kind != "pathloss":
        raise ValueError("path-loss maps need a pathloss color scale")
    img = scale.colors(pl_map.values)
    if overlay and scene is not None and scene.buildings:
        xx, yy = pl_map.grid.mesh()
        heights = scene.height_at(xx, yy)
        roof = heights > 0
        img[roof] = HEIGHT_SCALE.colors(heights[roof])
    return img[::-1]


def write_heatmap(pl_map: PathLossMap, scale: ColorScale, path,
                  scene: Scene | None = None, overlay: bool = False) -> None:
    img = render_rgb(pl_map, scale, scene, overlay)
    Image.fromarray(np.ascontiguousarray(img)).save(Path(path), format="PNG", optimize=False)


# ---------------------------------------------------------------- reports

def summary_to_dict(s: SummaryStats) -> dict:
    return {
        "pl_min": s.pl_min,
        "pl_max": s.pl_max,
        "pl_avg": s.pl_avg,
        "finite_count": s.finite_count,
        "excluded_count": s.excluded_count,
    }


def gain_to_dict(g: GainReport) -> dict:
    return {"g_min": g.g_min, "g_max": g.g_max, "g_avg": g.g_avg, "reference": g.reference}


def write_cdf_csv(pl_map: PathLossMap, path, exclude=None) -> None:
    series = cdf(pl_map, exclude=exclude)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pl_db", "fraction"])
        for v, f in zip(series.pl, series.fraction):
            w.writerow([repr(float(v)), repr(float(f))])


def write_candidates_csv(campaign, path) -> None:
    by_id = {p.ris_id: p for p in campaign.placements}
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([
            "rank", "ris_id", "x", "y",
            "ris_min", "ris_max", "ris_avg",
            "ris_bs_min", "ris_bs_max", "ris_bs_avg",
            "improved_fraction",
        ])
        for rank, rid in enumerate(campaign.ranking, start=1):
            p = by_id[rid]
            w.writerow([
                rank, rid, f"{p.position[0]:.4f}", f"{p.position[1]:.4f}",
                *(_fmt_db(v) for v in p.stats_ris.as_tuple()),
                *(_fmt_db(v) for v in p.stats_ris_bs.as_tuple()),
                f"{p.coverage_delta:.6f}",
            ])


def write_summary_json(campaign, path) -> dict:
    summaries = campaign.summaries()
    report = {
        "p_tx_avg_dbm": campaign.p_tx_avg,
        "grid": {
            "origin": list(campaign.bs_map.grid.origin),
            "resolution": campaign.bs_map.grid.resolution,
            "X": campaign.bs_map.grid.X,
            "Y": campaign.bs_map.grid.Y,
            "rx_height": campaign.bs_map.grid.rx_height,
        },
        "summaries": {k: summary_to_dict(s) for k, s in summaries.items()},
        "gains": {k: gain_to_dict(g) for k, g in campaign.gain_reports(summaries).items()},
        "ranking": list(campaign.ranking),
    }
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def write_reports(campaign, out_dir, scene: Scene | None = None, overlay: bool = False) -> list[Path]:
    """Summary JSON, CDFs, candidate table, map CSVs and heatmaps for one campaign."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "summary.json"
    write_summary_json(campaign, p)
    written.append(p)
    for name, m in campaign.maps.items():
        p = out / f"cdf_{name}.csv"
        write_cdf_csv(m, p, exclude=campaign.exclude)
        written.append(p)
        p = out / f"map_{name}.csv"
        write_map_csv(m, p)
        written.append(p)
        p = out / f"heatmap_{name}.png"
        write_heatmap(m, PATHLOSS_SCALE, p, scene=scene, overlay=overlay)
        written.append(p)
    p = out / "candidates.csv"
    write_candidates_csv(campaign, p)
    written.append(p)
    return written


def write_candidate_maps(campaign, out_dir) -> None:
    if not campaign.candidate_maps:
        return
    out = Path(out_dir) / "candidates"
    out.mkdir(parents=True, exist_ok=True)
    for rid, (m_ris, m_rb) in sorted(campaign.candidate_maps.items()):
        write_map_csv(m_ris, out / f"ris{rid}_RIS.csv")
        write_map_csv(m_rb, out / f"ris{rid}_RIS_BS.csv")


# ---------------------------------------------------------------- tables

_COL_LABELS = {"BS": "BS", "RIS": "RIS", "RIS_BS": "RIS,BS", "AVG": "AVG"}


def format_tables(summaries: dict[str, dict], gain_reports: dict[str, dict]) -> str:
    """Two plain-text tables: PL statistics per scenario and gains relative to BS."""
    cols = [c for c in SCENARIOS if c in summaries]
    lines = ["Path loss [dB]", f"{'':8s}" + "".join(f"{_COL_LABELS[c]:>10s}" for c in cols)]
    for label, key in (("PL_min", "pl_min"), ("PL_max", "pl_max"), ("PL_avg", "pl_avg")):
        lines.append(f"{label:8s}" + "".join(f"{summaries[c][key]:10.2f}" for c in cols))
    gcols = [c for c in ("RIS", "RIS_BS", "AVG") if c in gain_reports]
    lines += ["", "Gain vs BS [%]", f"{'':8s}" + "".join(f"{_COL_LABELS[c]:>10s}" for c in gcols)]
    for label, key in (("G_min", "g_min"), ("G_max", "g_max"), ("G_avg", "g_avg")):
        lines.append(f"{label:8s}" + "".join(f"{gain_reports[c][key]:10.2f}" for c in gcols))
    return "\n".join(lines) + "\n"


def check_summary_consistency(report: dict, tol: float = 1e-9) -> list[str]:
    """Recompute gains from the stored statistics; return a message per mismatch."""
    problems = []
    s = report["summaries"]

    def stats(name):
        d = s[name]
        return SummaryStats(d["pl_min"], d["pl_max"], d["pl_avg"], name, d.get("finite_count", 0))

    for name, stored in report.get("gains", {}).items():
        g = gains(stats("BS"), stats(name))
        for key, val in zip(("g_min", "g_max", "g_avg"), g.as_tuple()):
            if abs(stored[key] - val) > tol:
                problems.append(f"{name}.{key}: stored {stored[key]!r}, recomputed {val!r}")
    return problems
