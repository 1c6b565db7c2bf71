"""Deterministic synthetic scenes for demos and tests.

The reference city data is not public, so these scenes stand in for it:
a small 200 m block with two sites, and a larger layout shaped like the
reference deployment (8 sites x 3 bands, 8 x 8 RIS candidates).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .environment import Building, CellConfig, Scene, SiteConfig

# per-band transmitter parameters of the reference deployment (800 / 2100 / 3500 MHz)
BAND_TABLE = {
    800.0: dict(bandwidth=80.0, antenna_elements=1, antenna_gain=16.0, feeder_loss=2.0,
                spatial_duty_cycle=0.0, noise_figure=8.0, shadow_margin=12.8, implementation_loss=0.0),
    2100.0: dict(bandwidth=120.0, antenna_elements=1, antenna_gain=18.0, feeder_loss=2.0,
                 spatial_duty_cycle=0.0, noise_figure=8.0, shadow_margin=15.2, implementation_loss=0.0),
    3500.0: dict(bandwidth=120.0, antenna_elements=64, antenna_gain=24.0, feeder_loss=3.0,
                 spatial_duty_cycle=25.0, noise_figure=7.0, shadow_margin=10.0, implementation_loss=3.0),
}
_COMMON = dict(tx_power=43.0, used_subcarriers=320, total_subcarriers=512, sampling_factor=1.536,
               pilot_reuse=1, coherence_time=50.0, coherence_bandwidth=1.0,
               interference_margin=2.0, doppler_margin=3.0, fade_margin=10.0)


def reference_cells() -> tuple[CellConfig, ...]:
    return tuple(CellConfig(frequency=f, **_COMMON, **kw) for f, kw in BAND_TABLE.items())


def _box(x0, y0, w, d, h) -> Building:
    return Building(np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + d], [x0, y0 + d]]), h)


def demo_scene() -> Scene:
    """200 m x 200 m block with six buildings of 12-38 m."""
    buildings = (
        _box(20, 20, 40, 30, 25.0),
        _box(90, 15, 30, 45, 38.0),
        _box(140, 110, 45, 35, 18.0),
        _box(30, 120, 35, 50, 30.0),
        _box(95, 95, 25, 25, 12.0),
        Building(np.array([[150, 30], [185, 40], [175, 80], [140, 70]]), 22.0),
    )
    return Scene(bounds=(0.0, 0.0, 200.0, 200.0), buildings=buildings)


def demo_sites() -> list[SiteConfig]:
    cells = reference_cells()
    return [
        SiteConfig("A", (75.0, 80.0), 30.0, cells),
        SiteConfig("B", (170.0, 175.0), 35.0, cells),
    ]


def city_scene(seed: int = 7, size: float = 600.0, blocks: int = 6) -> Scene:
    """A ``blocks x blocks`` street grid with one building per block, heights 10-45 m."""
    rng = np.random.default_rng(seed)
    pitch = size / blocks
    buildings = []
    for r in range(blocks):
        for c in range(blocks):
            margin = rng.uniform(0.15, 0.3, size=2) * pitch
            w, d = pitch - 2 * margin
            buildings.append(_box(c * pitch + margin[0], r * pitch + margin[1], w, d,
                                  float(np.round(rng.uniform(10.0, 45.0), 1))))
    return Scene(bounds=(0.0, 0.0, size, size), buildings=tuple(buildings))


def city_sites(seed: int = 7, size: float = 600.0, n_sites: int = 8) -> list[SiteConfig]:
    """Sites on street corners with antenna heights in 27-47 m."""
    rng = np.random.default_rng(seed + 1)
    cells = reference_cells()
    corners = [(x, y) for x in np.linspace(0.1, 0.9, 5) for y in np.linspace(0.1, 0.9, 5)]
    picks = rng.choice(len(corners), size=n_sites, replace=False)
    sites = []
    for k, idx in enumerate(sorted(picks)):
        x, y = corners[idx]
        h = float(np.round(rng.uniform(27.0, 47.0), 1))
        sites.append(SiteConfig(f"BS{k}", (x * size, y * size), h, cells))
    return sites


def write_inputs(out_dir, scene: Scene, sites, rows: int, cols: int, h_ris: float = 40.0,
                 resolution: float = 5.0) -> Path:
    """Write scene, site and cell files plus a run config; returns the config path."""
    from .io_render import scene_to_geojson, write_sites

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scene.geojson").write_text(json.dumps(scene_to_geojson(scene), indent=1) + "\n")
    write_sites(sites, out / "sites.csv", out / "cells.csv")
    config = {
        "scene": "scene.geojson",
        "sites": "sites.csv",
        "cells": "cells.csv",
        "grid": {"resolution": resolution, "rx_height": 1.5},
        "ris": {"rows": rows, "cols": cols, "height": h_ris},
        "output_dir": "out",
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n")
    return path
