"""Command-line front end: ``risplan run | candidates | report``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .environment import (
    ConfigurationError,
    InvalidSceneError,
    build_grid,
    check_site_heights,
    generate_ris_candidates,
)
from .io_render import (
    check_summary_consistency,
    format_tables,
    load_scene,
    load_sites,
    write_candidate_maps,
    write_reports,
)
from .placement import CampaignConfig, default_threads, run_campaign
from .propagation import BeamAngles, RisPanel

log = logging.getLogger("risplan")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class ConfigError(Exception):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class RunConfig:
    scene_path: Path
    sites_path: Path
    cells_path: Path
    output_dir: Path
    resolution: float = 5.0
    rx_height: float = 1.5
    ris_rows: int = 8
    ris_cols: int = 8
    ris_height: float = 40.0
    panel: RisPanel = field(default_factory=RisPanel)
    angles: BeamAngles = field(default_factory=BeamAngles)
    per_band_maps: bool = False
    per_candidate_maps: bool = False
    building_overlay: bool = False
    exclude_footprints: bool = False
    rank_by: str = "avg_pl"
    threads: int = 1


def _number(section: dict, key: str, where: str, default, kind=float):
    val = section.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}{key}", f"expected a number, got {val!r}")
    if kind is int and val != int(val):
        raise ConfigError(f"{where}{key}", f"expected an integer, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(f"{where}{key}", "must be finite")
    return kind(val)


def _subconfig(cls, section, where):
    if section is None:
        return cls()
    if not isinstance(section, dict):
        raise ConfigError(where.rstrip("."), "expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"{where}{sorted(unknown)[0]}", "unknown field")
    kwargs = {}
    for f in fields(cls):
        if f.name in section:
            kind = int if f.type in ("int", int) else float
            kwargs[f.name] = _number(section, f.name, where, None, kind)
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(where.rstrip("."), str(exc)) from exc


def parse_config(path) -> RunConfig:
    """Load and validate a JSON run configuration; relative paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be an object")
    base = path.parent

    def file_field(key):
        if key not in doc:
            raise ConfigError(key, "missing")
        p = Path(doc[key])
        p = p if p.is_absolute() else base / p
        if not p.is_file():
            raise ConfigError(key, f"file not found: {p}")
        return p

    scene_path = file_field("scene")
    sites_path = file_field("sites")
    cells_path = file_field("cells")
    out = Path(doc.get("output_dir", "out"))
    out = out if out.is_absolute() else base / out

    grid = doc.get("grid", {}) or {}
    ris = doc.get("ris", {}) or {}
    flags = doc.get("flags", {}) or {}
    for name, section in (("grid", grid), ("ris", ris), ("flags", flags)):
        if not isinstance(section, dict):
            raise ConfigError(name, "expected an object")

    cfg = RunConfig(
        scene_path=scene_path,
        sites_path=sites_path,
        cells_path=cells_path,
        output_dir=out,
        resolution=_number(grid, "resolution", "grid.", 5.0),
        rx_height=_number(grid, "rx_height", "grid.", 1.5),
        ris_rows=_number(ris, "rows", "ris.", 8, int),
        ris_cols=_number(ris, "cols", "ris.", 8, int),
        ris_height=_number(ris, "height", "ris.", 40.0),
        panel=_subconfig(RisPanel, ris.get("panel"), "ris.panel."),
        angles=_subconfig(BeamAngles, ris.get("angles"), "ris.angles."),
        threads=_number(doc, "threads", "", default_threads(), int),
        rank_by=doc.get("rank_by", "avg_pl"),
    )
    for flag in ("per_band_maps", "per_candidate_maps", "building_overlay", "exclude_footprints"):
        val = flags.get(flag, False)
        if not isinstance(val, bool):
            raise ConfigError(f"flags.{flag}", "expected true or false")
        setattr(cfg, flag, val)

    if cfg.resolution <= 0:
        raise ConfigError("grid.resolution", "must be > 0")
    if cfg.rx_height <= 1.0:
        raise ConfigError("grid.rx_height", "must exceed 1 m (UMa effective environment height)")
    if cfg.ris_rows < 0 or cfg.ris_cols < 0:
        raise ConfigError("ris.rows", "rows and cols must be >= 0")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    if cfg.rank_by not in ("avg_pl", "improved_fraction"):
        raise ConfigError("rank_by", "must be 'avg_pl' or 'improved_fraction'")
    for name in ("theta_t", "theta_r"):
        theta = getattr(cfg.angles, name)
        if not 0 <= theta < math.pi / 2:
            raise ConfigError(f"ris.angles.{name}", "must lie in [0, pi/2)")
    return cfg


def _load_inputs(cfg: RunConfig):
    try:
        scene = load_scene(cfg.scene_path)
    except InvalidSceneError as exc:
        raise ConfigError("scene", str(exc)) from exc
    try:
        sites = load_sites(cfg.sites_path, cfg.cells_path)
    except ConfigurationError as exc:
        raise ConfigError("sites", str(exc)) from exc
    if not any(s.cells for s in sites):
        raise ConfigError("cells", "no site has any cell")
    check_site_heights(sites)
    return scene, sites


def _candidates(cfg: RunConfig, scene):
    if cfg.ris_rows == 0 or cfg.ris_cols == 0:
        return []
    return generate_ris_candidates(scene, cfg.ris_rows, cfg.ris_cols, cfg.ris_height)


def _run_one(cfg: RunConfig, scene, sites, out_dir: Path) -> str:
    grid = build_grid(scene, cfg.resolution, cfg.rx_height)
    candidates = _candidates(cfg, scene)
    log.info("grid %dx%d, %d sites, %d RIS candidates", grid.X, grid.Y, len(sites), len(candidates))
    campaign = run_campaign(
        scene, sites, candidates, grid,
        CampaignConfig(
            panel=cfg.panel,
            angles=cfg.angles,
            threads=cfg.threads,
            keep_candidate_maps=cfg.per_candidate_maps,
            rank_by=cfg.rank_by,
            exclude_footprints=cfg.exclude_footprints,
        ),
    )
    write_reports(campaign, out_dir, scene=scene, overlay=cfg.building_overlay)
    write_candidate_maps(campaign, out_dir)
    report = json.loads((out_dir / "summary.json").read_text())
    return format_tables(report["summaries"], report["gains"])


def cmd_run(config_path, threads: int | None = None, output: str | None = None,
            per_band: bool | None = None) -> int:
    try:
        cfg = parse_config(config_path)
        if threads is not None:
            if threads < 1:
                raise ConfigError("threads", "must be >= 1")
            cfg.threads = threads
        if output is not None:
            cfg.output_dir = Path(output)
        if per_band is not None:
            cfg.per_band_maps = per_band
        scene, sites = _load_inputs(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tables = _run_one(cfg, scene, sites, cfg.output_dir)
        print(tables, end="")
        if cfg.per_band_maps:
            freqs = sorted({c.frequency for s in sites for c in s.cells})
            for f in freqs:
                band_sites = [
                    type(s)(s.site_id, s.position, s.antenna_height,
                            tuple(c for c in s.cells if c.frequency == f))
                    for s in sites
                ]
                band_dir = cfg.output_dir / f"band_{f:g}MHz"
                band_tables = _run_one(cfg, scene, band_sites, band_dir)
                print(f"\n[{f:g} MHz]\n{band_tables}", end="")
    except Exception as exc:  # noqa: BLE001
        log.exception("run failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_candidates(config_path) -> int:
    try:
        cfg = parse_config(config_path)
        try:
            scene = load_scene(cfg.scene_path)
        except InvalidSceneError as exc:
            raise ConfigError("scene", str(exc)) from exc
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for c in _candidates(cfg, scene):
        print(f"{c.ris_id},{c.position[0]:.4f},{c.position[1]:.4f},{c.height:.4f}")
    return EXIT_OK


def cmd_report(campaign_dir) -> int:
    path = Path(campaign_dir) / "summary.json"
    if not path.is_file():
        print(f"missing artifact: {path}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = json.loads(path.read_text())
        summaries, gain_reports = report["summaries"], report["gains"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"unreadable summary: {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(format_tables(summaries, gain_reports), end="")
    try:
        problems = check_summary_consistency(report)
    except (KeyError, TypeError, ZeroDivisionError, ValueError) as exc:
        problems = [f"cannot recompute gains: {exc}"]
    if problems:
        for p in problems:
            print(f"warning: inconsistent gains: {p}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risplan", description="RIS-aware path-loss coverage planning")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the placement campaign and write all reports")
    p_run.add_argument("config")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: config, then $RISPLAN_THREADS, then 1)")
    p_run.add_argument("--output", default=None, help="output directory (overrides config)")
    p_run.add_argument("--per-band", action="store_true", default=None,
                       help="also write single-band campaigns under band_<f>MHz/")

    p_cand = sub.add_parser("candidates", help="list RIS candidate placements")
    p_cand.add_argument("config")

    p_rep = sub.add_parser("report", help="re-print the tables of a finished run")
    p_rep.add_argument("campaign_dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "run":
        return cmd_run(args.config, args.threads, args.output, args.per_band)
    if args.command == "candidates":
        return cmd_candidates(args.config)
    return cmd_report(args.campaign_dir)


if __name__ == "__main__":
    sys.exit(main())
