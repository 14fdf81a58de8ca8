"""Crossbar array planning, in-array stream generation, and the cost model.

A bit stream is striped across 128x128 tiles with one active row per tile,
so a stream of N_bit bits needs ceil(N_bit / 128) tiles. Tile counts are
doubled once for the reset ping-pong (half the tiles reset while the other
half generate) and once more per stream (gradient and weight each own an
array). Readout is time-multiplexed into two phases because each sense
amplifier borrows its reference from the adjacent column.

Power of one readout follows

    P_read = N_bit * [P_on * E + P_off * (1 - E)],

with E the mean on-cell probability of the array. Evaluated literally with
the published constants this yields ~399 uW per gradient stream, not the
published 43.0 uW; no bridging duty-cycle assumption is published. A single
calibration scalar kappa (default 0.108) maps the raw value onto the
published per-stream powers, and reports always carry both numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .device import DeviceParams, pulse_width_for, switch_probability
from .rng import RngState
from .sc import BitStream, Priori

__all__ = [
    "TileConfig",
    "ArrayPlan",
    "GenerationStats",
    "CostReport",
    "MacComparison",
    "plan_array",
    "generate_stream",
    "area_report",
    "power_report",
    "mac_comparison",
    "DEFAULT_KAPPA",
]

DEFAULT_KAPPA = 0.108


@dataclass
class TileConfig:
    """Geometry and electrical constants of the 40 nm RRAM macro."""

    rows: int = 128
    cols: int = 128
    tile_area_um2: float = 2.77e3
    pitch_nm: float = 410.0
    p_on_w: float = 45e-9        # LDMOS on-cell draw at 4.5 V
    p_off_w: float = 0.45e-9
    xnor_area_um2: float = 0.670 * 0.355   # single gate, pitch-matched
    xnor_total_area_mm2: float = 0.031     # full multiplier datapath
    adder_register_area_mm2: float = 0.0735
    sense_amp_area_um2: float = 0.41
    sense_amp_total_area_mm2: float = 0.0267
    mac_delay_ps: float = 58.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("tile dimensions must be positive")
        for name in (
            "tile_area_um2", "pitch_nm", "p_on_w", "p_off_w", "xnor_area_um2",
            "xnor_total_area_mm2", "adder_register_area_mm2",
            "sense_amp_area_um2", "sense_amp_total_area_mm2", "mac_delay_ps",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def bits_per_tile(self) -> int:
        return self.rows * self.cols


@dataclass
class ArrayPlan:
    """Tile allocation for a bit-stream configuration."""

    n_bit: int
    n_streams: int
    tiles_per_stream: int
    pingpong_factor: int = 2
    total_tiles: int = 0
    time_mux_steps: int = 2


@dataclass
class GenerationStats:
    """Bookkeeping from one in-array stream generation."""

    on_count: int
    phases: int
    tiles: int
    pulse_width_s: float


@dataclass
class CostReport:
    """Area and power figures; calibrated powers sit beside raw Eq.-style values."""

    rram_area_mm2: float
    xnor_area_mm2: float
    adder_register_area_mm2: float
    sense_amp_area_mm2: float
    total_area_mm2: float
    p_read_gradient_raw_w: float | None = None
    p_read_weight_raw_w: float | None = None
    p_read_gradient_w: float | None = None
    p_read_weight_w: float | None = None
    total_power_w: float | None = None
    static_power_cap_w: float | None = None
    e_grad_stat: float | None = None
    e_weight_stat: float | None = None
    calibration_kappa: float | None = None

    def to_flat_dict(self) -> dict:
        return asdict(self)


@dataclass
class MacComparison:
    """Fixed comparison of the SC MAC (one XNOR + one MUX) vs a 16-bit binary MAC."""

    sc_mac_delay_ps: float
    xnor_mux_area_mm2: float
    binary_mac_area_ratio: float = 1e5
    binary_mac_delay_ratio: float = 1e2


def plan_array(n_bit: int, n_streams: int, tile: TileConfig | None = None) -> ArrayPlan:
    """Tiles needed for n_streams parallel streams of n_bit bits each.

    One active row per tile bounds a stream's per-tile contribution to
    ``tile.cols`` bits; the total is doubled for the reset ping-pong.
    """
    tile = tile if tile is not None else TileConfig()
    if n_bit < 1:
        raise ValueError("n_bit must be >= 1")
    if n_streams < 1:
        raise ValueError("n_streams must be >= 1")
    tiles_per_stream = math.ceil(n_bit / tile.cols)
    plan = ArrayPlan(n_bit=n_bit, n_streams=n_streams, tiles_per_stream=tiles_per_stream)
    plan.total_tiles = plan.pingpong_factor * n_streams * tiles_per_stream
    return plan


def generate_stream(
    target_p: float,
    n_bit: int,
    device: DeviceParams,
    tile: TileConfig,
    rng: RngState,
    priori: Priori = Priori.BIPOLAR,
) -> tuple[BitStream, GenerationStats]:
    """Simulate in-array generation of an n_bit stream at on-probability target_p.

    A fixed-voltage pulse of width pulse_width_for(target_p) is applied to
    one active row in each of ceil(n_bit / cols) tiles; cells are read out
    in two column-sharing phases. The resulting bits are i.i.d.
    Bernoulli(target_p): the tiling and phasing add structure, not bias.
    """
    if n_bit < 1:
        raise ValueError("n_bit must be >= 1")
    width = pulse_width_for(target_p, device.v_prog, device)  # validates target_p
    n_tiles = math.ceil(n_bit / tile.cols)
    bits = np.zeros(n_bit, dtype=bool)
    for t in range(n_tiles):
        lo = t * tile.cols
        cells = min(tile.cols, n_bit - lo)
        gen = rng.split("tile", t).generator
        if device.cell_jitter > 0:
            tau_scale = gen.lognormal(0.0, device.cell_jitter, size=cells)
            p_cell = -np.expm1(np.log1p(-target_p) / tau_scale)
        else:
            p_cell = np.full(cells, switch_probability(width, device.v_prog, device))
        # Two sense phases: even columns first, odd columns second.
        row = np.zeros(cells, dtype=bool)
        for phase in range(2):
            idx = np.arange(phase, cells, 2)
            row[idx] = gen.random(idx.size) < p_cell[idx]
        bits[lo : lo + cells] = row
    stream = BitStream.from_bools(bits, priori)
    stats = GenerationStats(
        on_count=stream.popcount(), phases=2, tiles=n_tiles, pulse_width_s=width
    )
    return stream, stats


def area_report(plan: ArrayPlan, tile: TileConfig | None = None) -> CostReport:
    """Silicon area of the plan: RRAM tiles plus the fixed peripheral blocks."""
    tile = tile if tile is not None else TileConfig()
    rram_mm2 = plan.total_tiles * tile.tile_area_um2 / 1e6
    total = (
        rram_mm2
        + tile.xnor_total_area_mm2
        + tile.adder_register_area_mm2
        + tile.sense_amp_total_area_mm2
    )
    return CostReport(
        rram_area_mm2=rram_mm2,
        xnor_area_mm2=tile.xnor_total_area_mm2,
        adder_register_area_mm2=tile.adder_register_area_mm2,
        sense_amp_area_mm2=tile.sense_amp_total_area_mm2,
        total_area_mm2=total,
    )


def _p_read_raw(n_bit: int, e: float, tile: TileConfig) -> float:
    # One readout of an n_bit stream at mean on-cell probability e.
    return n_bit * (tile.p_on_w * e + tile.p_off_w * (1.0 - e))


def power_report(
    plan: ArrayPlan,
    e_grad: float,
    e_weight: float,
    tile: TileConfig | None = None,
    kappa: float = DEFAULT_KAPPA,
) -> CostReport:
    """Full cost report: areas plus calibrated and raw read powers.

    Reported per-stream powers are kappa times the raw readout value; the
    total doubles their sum for the reset tiles, and time multiplexing
    halves the static-power ceiling.
    """
    tile = tile if tile is not None else TileConfig()
    if not 0.0 <= e_grad <= 1.0 or not 0.0 <= e_weight <= 1.0:
        raise ValueError("expected on-cell probabilities must lie in [0, 1]")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    report = area_report(plan, tile)
    raw_grad = _p_read_raw(plan.n_bit, e_grad, tile)
    raw_weight = _p_read_raw(plan.n_bit, e_weight, tile)
    report.p_read_gradient_raw_w = raw_grad
    report.p_read_weight_raw_w = raw_weight
    report.p_read_gradient_w = kappa * raw_grad
    report.p_read_weight_w = kappa * raw_weight
    report.total_power_w = 2.0 * (report.p_read_gradient_w + report.p_read_weight_w)
    report.static_power_cap_w = report.total_power_w / 2.0
    report.e_grad_stat = e_grad
    report.e_weight_stat = e_weight
    report.calibration_kappa = kappa
    return report


def mac_comparison(tile: TileConfig | None = None) -> MacComparison:
    """Informational constants comparing the SC MAC against a 16-bit binary MAC."""
    tile = tile if tile is not None else TileConfig()
    return MacComparison(
        sc_mac_delay_ps=tile.mac_delay_ps,
        xnor_mux_area_mm2=tile.xnor_total_area_mm2,
    )
