"""RIS-aware radio coverage planning: path-loss maps with and without reflecting surfaces."""

from .composition import (
    PathLossMap,
    avg_transmit_power,
    map_avg,
    map_bs,
    map_reinforced,
    map_ris,
    received_power,
)
from .environment import (
    Building,
    CellConfig,
    MeasurementGrid,
    RisPlacement,
    Scene,
    SiteConfig,
    build_grid,
    distances,
    generate_ris_candidates,
    is_los,
)
from .metrics import cdf, gains, summarize
from .placement import CampaignConfig, run_campaign, rank_candidates
from .propagation import (
    BeamAngles,
    RisPanel,
    UmaParams,
    far_field_distance,
    ris_ffbc_pl,
    uma_breakpoint,
    uma_pl_los,
    uma_pl_nlos,
)

__version__ = "0.1.0"
