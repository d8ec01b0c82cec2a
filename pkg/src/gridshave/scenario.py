"""Hourly scenarios: file I/O, synthetic generation and the no-storage baseline.

Scenario CSV schema (exact header):

    timestamp,p_base_mw,q_cool_mw,q_steam_mw,twb_c

Timestamps are ISO-8601, strictly hourly. Metadata (name, source, seed)
round-trips through leading `# key: value` comment lines. Floats are written
with repr so load(write(s)) == s exactly.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

log = logging.getLogger(__name__)

from .cooling import DEFAULT_COP_MODEL, DEFAULT_TES, CopModel, TesConfig, chiller_power
from .errors import (
    ChillerCapacityError,
    DegenerateCopError,
    InfeasibleDemandError,
    ScenarioParseError,
    ShapeError,
    SynthesisError,
)
from .plant import DEFAULT_PLANT, PlantConfig

SCENARIO_HEADER = "timestamp,p_base_mw,q_cool_mw,q_steam_mw,twb_c"

HOURS_PER_DAY = 24


@dataclass
class Scenario:
    """Exogenous hourly inputs for a simulation horizon."""

    timestamps: list[datetime]
    p_base: np.ndarray
    q_cool: np.ndarray
    q_s_c: np.ndarray
    twb: np.ndarray
    name: str = "scenario"
    source: str = "file"
    seed: int | None = None

    def __post_init__(self):
        for attr in ("p_base", "q_cool", "q_s_c", "twb"):
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=float))
        n = len(self.timestamps)
        for attr in ("p_base", "q_cool", "q_s_c", "twb"):
            if getattr(self, attr).shape != (n,):
                raise ShapeError(f"{attr} length differs from timestamps ({n})")

    def __len__(self):
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.name == other.name and self.source == other.source
                and self.seed == other.seed
                and self.timestamps == other.timestamps
                and np.array_equal(self.p_base, other.p_base)
                and np.array_equal(self.q_cool, other.q_cool)
                and np.array_equal(self.q_s_c, other.q_s_c)
                and np.array_equal(self.twb, other.twb))

    def slice_hours(self, start: int, stop: int) -> "Scenario":
        return Scenario(
            timestamps=self.timestamps[start:stop],
            p_base=self.p_base[start:stop],
            q_cool=self.q_cool[start:stop],
            q_s_c=self.q_s_c[start:stop],
            twb=self.twb[start:stop],
            name=f"{self.name}[{start}:{stop}]",
            source=self.source,
            seed=self.seed,
        )


def split_days(scenario: Scenario) -> list[Scenario]:
    """Cut a scenario into midnight-to-midnight days of 24 hours."""
    n = len(scenario)
    if n % HOURS_PER_DAY != 0:
        raise ShapeError(
            f"scenario length {n} is not a multiple of {HOURS_PER_DAY} hours")
    return [scenario.slice_hours(i, i + HOURS_PER_DAY)
            for i in range(0, n, HOURS_PER_DAY)]


def load_scenario(path: str) -> Scenario:
    """Read and validate a scenario CSV; errors carry the offending row."""
    if not os.path.exists(path):
        raise ScenarioParseError(f"scenario file not found: {path}")
    meta = {"name": os.path.splitext(os.path.basename(path))[0],
            "source": "file", "seed": None}
    rows: list[str] = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    key, value = key.strip(), value.strip()
                    if key == "seed":
                        meta["seed"] = None if value == "none" else int(value)
                    elif key in ("name", "source"):
                        meta[key] = value
                continue
            if header is None:
                header = line.strip()
                continue
            rows.append(line)
    if header != SCENARIO_HEADER:
        raise ScenarioParseError(
            f"{path}: expected header {SCENARIO_HEADER!r}, got {header!r}")
    if not rows:
        raise ScenarioParseError(f"{path}: no data rows")

    timestamps: list[datetime] = []
    cols = {name: [] for name in ("p_base", "q_cool", "q_s_c", "twb")}
    nonneg = {"p_base": "p_base_mw", "q_cool": "q_cool_mw", "q_s_c": "q_steam_mw"}
    for row_no, line in enumerate(rows, start=1):
        cells = line.split(",")
        if len(cells) != 5:
            raise ScenarioParseError(
                f"{path}: row {row_no}: expected 5 columns, got {len(cells)}", row=row_no)
        try:
            ts = datetime.fromisoformat(cells[0])
        except ValueError as exc:
            raise ScenarioParseError(
                f"{path}: row {row_no}: bad timestamp {cells[0]!r}", row=row_no) from exc
        values = {}
        for name, cell in zip(("p_base", "q_cool", "q_s_c", "twb"), cells[1:]):
            try:
                values[name] = float(cell)
            except ValueError as exc:
                raise ScenarioParseError(
                    f"{path}: row {row_no}: non-numeric cell {cell!r}",
                    row=row_no) from exc
        for name, column in nonneg.items():
            if values[name] < 0.0:
                raise ScenarioParseError(
                    f"{path}: row {row_no}: {column} = {values[name]} is negative",
                    row=row_no)
        if timestamps:
            gap = (ts - timestamps[-1]).total_seconds()
            if gap <= 0:
                raise ScenarioParseError(
                    f"{path}: row {row_no}: timestamps not strictly increasing",
                    row=row_no)
            if gap != 3600.0:
                raise ScenarioParseError(
                    f"{path}: row {row_no}: non-hourly gap of {gap:.0f} s", row=row_no)
        timestamps.append(ts)
        for name in cols:
            cols[name].append(values[name])

    scenario = Scenario(
        timestamps=timestamps,
        p_base=np.array(cols["p_base"]),
        q_cool=np.array(cols["q_cool"]),
        q_s_c=np.array(cols["q_s_c"]),
        twb=np.array(cols["twb"]),
        name=meta["name"], source=meta["source"], seed=meta["seed"],
    )
    log.info(
        "loaded %s: %d hourly rows, p_base %.1f-%.1f MW, q_cool %.1f-%.1f MW, "
        "twb %.1f-%.1f C", path, len(scenario),
        scenario.p_base.min(), scenario.p_base.max(),
        scenario.q_cool.min(), scenario.q_cool.max(),
        scenario.twb.min(), scenario.twb.max())
    return scenario


def write_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# name: {scenario.name}\n")
        fh.write(f"# source: {scenario.source}\n")
        fh.write(f"# seed: {'none' if scenario.seed is None else scenario.seed}\n")
        fh.write(SCENARIO_HEADER + "\n")
        for i, ts in enumerate(scenario.timestamps):
            fh.write(",".join([
                ts.isoformat(),
                repr(float(scenario.p_base[i])),
                repr(float(scenario.q_cool[i])),
                repr(float(scenario.q_s_c[i])),
                repr(float(scenario.twb[i])),
            ]) + "\n")


@dataclass(frozen=True)
class SynthParams:
    """Shape parameters for synthetic summer days.

    The defaults are tuned so that with the default plant, COP model and
    storage configs the no-storage generation peaks in the mid-60s MW on the
    hottest day, with a mild overnight valley.
    """

    days: int = 3
    start: datetime = field(default_factory=lambda: datetime(2023, 6, 12))
    base_level_mw: float = 27.0
    base_peak_amp_mw: float = 8.5
    cool_base_mw: float = 66.0
    cool_peak_amp_mw: float = 71.0
    peak_hour: float = 15.0
    peak_width_h: float = 3.2
    twb_base_c: float = 21.0
    twb_amp_c: float = 4.0
    twb_peak_hour: float = 16.0
    steam_base_mw: float = 9.0
    steam_amp_mw: float = 3.0
    noise_mw: float = 0.5
    day_scale: tuple[float, ...] = (1.0, 0.93, 0.86)


def _daily_bell(hours: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((hours - center) / width) ** 2)


def generate_synthetic(params: SynthParams = SynthParams(),
                       seed: int = 1,
                       cop_model: CopModel = DEFAULT_COP_MODEL,
                       tes: TesConfig = DEFAULT_TES,
                       plant: PlantConfig = DEFAULT_PLANT) -> Scenario:
    """Deterministic synthetic scenario with afternoon-peaked cooling.

    Raises SynthesisError when the implied no-storage generation would exceed
    the plant's total capacity or the chiller capacity at any hour.
    """
    rng = np.random.default_rng(seed)
    hours = np.arange(HOURS_PER_DAY, dtype=float)

    p_base_parts = []
    q_cool_parts = []
    steam_parts = []
    twb_parts = []
    for day in range(params.days):
        scale = params.day_scale[day % len(params.day_scale)]
        bell = _daily_bell(hours, params.peak_hour, params.peak_width_h)
        p_base = params.base_level_mw + scale * params.base_peak_amp_mw * bell
        q_cool = params.cool_base_mw + scale * params.cool_peak_amp_mw * bell
        twb = params.twb_base_c + scale * params.twb_amp_c * np.cos(
            2.0 * math.pi * (hours - params.twb_peak_hour) / 24.0)
        steam = params.steam_base_mw + params.steam_amp_mw * np.cos(
            2.0 * math.pi * (hours - 7.0) / 24.0)
        if params.noise_mw > 0.0:
            p_base = p_base + rng.normal(0.0, params.noise_mw, HOURS_PER_DAY)
            q_cool = q_cool + rng.normal(0.0, 2.0 * params.noise_mw, HOURS_PER_DAY)
        p_base_parts.append(np.maximum(p_base, 0.0))
        q_cool_parts.append(np.maximum(q_cool, 0.0))
        steam_parts.append(np.maximum(steam, 0.0))
        twb_parts.append(np.clip(twb, cop_model.twb_min, cop_model.twb_max))

    timestamps = [params.start + timedelta(hours=i)
                  for i in range(params.days * HOURS_PER_DAY)]
    scenario = Scenario(
        timestamps=timestamps,
        p_base=np.concatenate(p_base_parts),
        q_cool=np.concatenate(q_cool_parts),
        q_s_c=np.concatenate(steam_parts),
        twb=np.concatenate(twb_parts),
        name=f"synthetic-{seed}",
        source="synthetic",
        seed=seed,
    )

    try:
        g = no_storage_baseline(scenario, cop_model, plant, tes)
    except (ChillerCapacityError, DegenerateCopError) as exc:
        raise SynthesisError(f"synthetic parameters are infeasible: {exc}") from exc
    if float(np.max(g)) > plant.cap_total:
        raise SynthesisError(
            f"synthetic parameters imply a no-storage peak of {np.max(g):.1f} MW, "
            f"above total plant capacity {plant.cap_total} MW")
    return scenario


def no_storage_baseline(scenario: Scenario,
                        cop_model: CopModel = DEFAULT_COP_MODEL,
                        plant: PlantConfig = DEFAULT_PLANT,
                        tes: TesConfig = DEFAULT_TES) -> np.ndarray:
    """Generation profile with the tank idle: G(t) = p_base + chiller power."""
    g = np.empty(len(scenario))
    for t in range(len(scenario)):
        try:
            p_ch = chiller_power(scenario.q_cool[t], scenario.twb[t], cop_model, tes)
        except (ChillerCapacityError, DegenerateCopError) as exc:
            raise type(exc)(f"hour {t}: {exc}") from exc
        g[t] = scenario.p_base[t] + p_ch
        if g[t] > plant.cap_total + 1e-9:
            raise InfeasibleDemandError(
                f"hour {t}: no-storage generation {g[t]:.2f} MW exceeds total "
                f"capacity {plant.cap_total} MW")
    return g
