"""RIS placement campaign: evaluate every candidate, aggregate the scenario maps, rank."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .composition import (
    PathLossMap,
    PropagationContext,
    avg_transmit_power,
    bs_map_from,
    compose_reinforced,
    compose_ris,
    map_avg,
    merge_ris_best,
)
from .environment import MeasurementGrid, RisPlacement, Scene, SiteConfig
from .metrics import GainReport, SummaryStats, gains, summarize
from .propagation import BeamAngles, RisPanel

RANK_CRITERIA = ("avg_pl", "improved_fraction")


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("RISPLAN_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CampaignConfig:
    panel: RisPanel = field(default_factory=RisPanel)
    angles: BeamAngles = field(default_factory=BeamAngles)
    threads: int = 1
    keep_candidate_maps: bool = False
    rank_by: str = "avg_pl"
    exclude_footprints: bool = False

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.rank_by not in RANK_CRITERIA:
            raise ValueError(f"rank_by must be one of {RANK_CRITERIA}")


@dataclass(frozen=True)
class PlacementResult:
    ris_id: int
    position: tuple[float, float]
    stats_ris: SummaryStats
    stats_ris_bs: SummaryStats
    coverage_delta: float

    @property
    def rank_key(self) -> float:
        return self.stats_ris_bs.pl_avg


@dataclass
class CampaignResult:
    bs_map: PathLossMap
    ris_map: PathLossMap
    reinforced_map: PathLossMap
    avg_map: PathLossMap
    placements: list[PlacementResult]
    ranking: list[int]
    p_tx_avg: float
    exclude: np.ndarray | None = None
    candidate_maps: dict[int, tuple[PathLossMap, PathLossMap]] | None = None

    @property
    def maps(self) -> dict[str, PathLossMap]:
        return {
            "BS": self.bs_map,
            "RIS": self.ris_map,
            "RIS_BS": self.reinforced_map,
            "AVG": self.avg_map,
        }

    def summaries(self) -> dict[str, SummaryStats]:
        return {name: summarize(m, exclude=self.exclude) for name, m in self.maps.items()}

    def gain_reports(self, summaries: dict[str, SummaryStats] | None = None) -> dict[str, GainReport]:
        s = summaries or self.summaries()
        return {name: gains(s["BS"], s[name]) for name in ("RIS", "RIS_BS", "AVG")}


def rank_candidates(results: Sequence[PlacementResult], criterion: str = "avg_pl") -> list[int]:
    """Candidate ids, best first; ties resolved by the lower ris id."""
    if criterion == "avg_pl":
        key = lambda r: (r.rank_key, r.ris_id)  # noqa: E731
    elif criterion == "improved_fraction":
        key = lambda r: (-r.coverage_delta, r.ris_id)  # noqa: E731
    else:
        raise ValueError(f"unknown ranking criterion {criterion!r}")
    return [r.ris_id for r in sorted(results, key=key)]


def _evaluate(ctx: PropagationContext, cand: RisPlacement):
    pl, cell = ctx.ris_paths(cand)
    return cand, pl, cell


def run_campaign(
    scene: Scene,
    sites: Sequence[SiteConfig],
    candidates: Sequence[RisPlacement],
    grid: MeasurementGrid,
    config: CampaignConfig | None = None,
) -> CampaignResult:
    """Evaluate every RIS placement and build the four scenario maps.

    Per-candidate results are merged by pointwise minimum in ris-id order,
    so the outcome does not depend on the number of worker threads.
    """
    config = config or CampaignConfig()
    ctx = PropagationContext(scene, sites, grid, config.panel, config.angles)
    p_tx = avg_transmit_power(ctx.tx_powers)
    bs = bs_map_from(ctx)
    exclude = None
    if config.exclude_footprints:
        xx, yy = grid.mesh()
        exclude = scene.footprint_mask(xx, yy)

    ordered = sorted(candidates, key=lambda c: c.ris_id)
    ids = [c.ris_id for c in ordered]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate ris ids among candidates")

    n = grid.size
    acc = (np.full(n, np.inf), np.full(n, -1, dtype=np.int64), np.full(n, -1, dtype=np.int64))
    placements: list[PlacementResult] = []
    kept: dict[int, tuple[PathLossMap, PathLossMap]] | None = {} if config.keep_candidate_maps else None
    bs_flat = bs.values.ravel()

    def consume(cand, pl, cell):
        nonlocal acc
        acc = merge_ris_best(acc, (pl, cell, cand.ris_id))
        m_ris = compose_ris(ctx, pl, cell, cand.ris_id)
        m_rb = compose_reinforced(ctx, pl, cell, cand.ris_id, p_tx)
        improved = float(np.count_nonzero(m_ris.values.ravel() < bs_flat)) / n
        placements.append(
            PlacementResult(
                ris_id=cand.ris_id,
                position=cand.position,
                stats_ris=summarize(m_ris, exclude=exclude),
                stats_ris_bs=summarize(m_rb, exclude=exclude),
                coverage_delta=improved,
            )
        )
        if kept is not None:
            kept[cand.ris_id] = (m_ris, m_rb)

    if config.threads == 1 or len(ordered) < 2:
        for cand in ordered:
            consume(*_evaluate(ctx, cand))
    else:
        # bounded batches keep at most a few candidate rasters alive at once
        batch = config.threads * 2
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for start in range(0, len(ordered), batch):
                chunk = ordered[start:start + batch]
                for res in pool.map(lambda c: _evaluate(ctx, c), chunk):
                    consume(*res)

    ris = compose_ris(ctx, *acc)
    reinforced = compose_reinforced(ctx, *acc, p_tx)
    avg = map_avg(bs, ris)
    ranking = rank_candidates(placements, config.rank_by) if placements else []
    return CampaignResult(
        bs_map=bs,
        ris_map=ris,
        reinforced_map=reinforced,
        avg_map=avg,
        placements=placements,
        ranking=ranking,
        p_tx_avg=p_tx,
        exclude=exclude,
        candidate_maps=kept,
    )
