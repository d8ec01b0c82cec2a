from datetime import datetime, timedelta

import numpy as np
import pytest

from gridshave.errors import (
    ChillerCapacityError,
    InfeasibleDemandError,
    ScenarioParseError,
    ShapeError,
    SynthesisError,
)
from gridshave.scenario import (
    Scenario,
    SynthParams,
    generate_synthetic,
    load_scenario,
    no_storage_baseline,
    split_days,
    write_scenario,
)


def _toy_scenario(hours=72, start=datetime(2023, 9, 10)):
    rng = np.random.default_rng(4)
    ts = [start + timedelta(hours=i) for i in range(hours)]
    return Scenario(
        timestamps=ts,
        p_base=rng.uniform(25.0, 35.0, hours),
        q_cool=rng.uniform(60.0, 120.0, hours),
        q_s_c=rng.uniform(5.0, 15.0, hours),
        twb=rng.uniform(18.0, 26.0, hours),
        name="toy", source="synthetic", seed=4)


# ---------------------------------------------------------------------------
# file round trip and validation

def test_round_trip_exact(tmp_path):
    scenario = _toy_scenario()
    path = tmp_path / "scenario.csv"
    write_scenario(scenario, str(path))
    loaded = load_scenario(str(path))
    assert loaded == scenario


def test_load_valid_72_rows(tmp_path):
    path = tmp_path / "scenario.csv"
    write_scenario(_toy_scenario(72), str(path))
    assert len(load_scenario(str(path))) == 72


def test_load_negative_cooling_cites_row(tmp_path):
    scenario = _toy_scenario(24)
    lines = []
    write_scenario(scenario, str(tmp_path / "ok.csv"))
    with open(tmp_path / "ok.csv") as fh:
        lines = fh.readlines()
    # row 10 of the data (3 comment lines + header + 9 rows before it)
    cells = lines[13].split(",")
    cells[2] = "-5.0"
    lines[13] = ",".join(cells)
    bad = tmp_path / "bad.csv"
    bad.write_text("".join(lines))
    with pytest.raises(ScenarioParseError) as exc_info:
        load_scenario(str(bad))
    assert exc_info.value.row == 10
    assert "row 10" in str(exc_info.value)


def test_load_duplicate_timestamp(tmp_path):
    scenario = _toy_scenario(24)
    scenario.timestamps[5] = scenario.timestamps[4]
    path = tmp_path / "dup.csv"
    write_scenario(scenario, str(path))
    with pytest.raises(ScenarioParseError) as exc_info:
        load_scenario(str(path))
    assert "strictly increasing" in str(exc_info.value)


def test_load_non_hourly_gap(tmp_path):
    scenario = _toy_scenario(24)
    scenario.timestamps[5] = scenario.timestamps[4] + timedelta(minutes=90)
    path = tmp_path / "gap.csv"
    write_scenario(scenario, str(path))
    with pytest.raises(ScenarioParseError) as exc_info:
        load_scenario(str(path))
    assert "non-hourly" in str(exc_info.value)


def test_load_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,p,q,s,t\n2023-09-10T00:00:00,1,2,3,4\n")
    with pytest.raises(ScenarioParseError):
        load_scenario(str(path))


def test_load_non_numeric_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp,p_base_mw,q_cool_mw,q_steam_mw,twb_c\n"
                    "2023-09-10T00:00:00,30,80,10,20\n"
                    "2023-09-10T01:00:00,30,eighty,10,20\n")
    with pytest.raises(ScenarioParseError) as exc_info:
        load_scenario(str(path))
    assert exc_info.value.row == 2


def test_load_missing_file():
    with pytest.raises(ScenarioParseError):
        load_scenario("/nonexistent/file.csv")


# ---------------------------------------------------------------------------
# synthetic generation

def test_synthetic_deterministic_per_seed():
    assert generate_synthetic(seed=1) == generate_synthetic(seed=1)


def test_synthetic_seeds_differ():
    assert generate_synthetic(seed=1) != generate_synthetic(seed=2)


def test_synthetic_default_no_storage_peak_in_band(synth_scenario):
    g = no_storage_baseline(synth_scenario)
    assert 63.0 <= float(np.max(g)) <= 68.0


def test_synthetic_zero_amplitude_is_flat():
    params = SynthParams(days=1, base_peak_amp_mw=0.0, cool_peak_amp_mw=0.0,
                         twb_amp_c=0.0, steam_amp_mw=0.0, noise_mw=0.0)
    scenario = generate_synthetic(params, seed=1)
    assert np.ptp(scenario.p_base) == 0.0
    assert np.ptp(scenario.q_cool) == 0.0
    assert np.ptp(scenario.twb) == 0.0


def test_synthetic_infeasible_params_rejected():
    with pytest.raises(SynthesisError):
        generate_synthetic(SynthParams(days=1, cool_peak_amp_mw=120.0), seed=1)


def test_synthetic_embeds_seed(synth_scenario):
    assert synth_scenario.seed == 1
    assert synth_scenario.source == "synthetic"


def test_synthetic_afternoon_peak_overnight_valley(synth_scenario):
    day = split_days(synth_scenario)[0]
    peak_hour = int(np.argmax(day.q_cool))
    assert 12 <= peak_hour <= 18
    overnight = np.concatenate([day.q_cool[:5], day.q_cool[22:]])
    assert float(np.max(overnight)) < float(np.max(day.q_cool)) - 20.0
    assert 10.0 <= float(np.min(day.twb)) and float(np.max(day.twb)) <= 30.0


# ---------------------------------------------------------------------------
# no-storage baseline

def test_no_storage_baseline_without_cooling():
    scenario = _toy_scenario(24)
    scenario.q_cool = np.zeros(24)
    scenario.twb = np.full(24, 20.0)
    g = no_storage_baseline(scenario)
    assert np.array_equal(g, scenario.p_base)


def test_no_storage_baseline_capacity_error_names_hour():
    scenario = _toy_scenario(24)
    scenario.q_cool[7] = 170.0
    with pytest.raises(ChillerCapacityError) as exc_info:
        no_storage_baseline(scenario)
    assert "hour 7" in str(exc_info.value)


def test_no_storage_baseline_demand_error_names_hour():
    scenario = _toy_scenario(24)
    scenario.p_base[3] = 60.0
    with pytest.raises(InfeasibleDemandError) as exc_info:
        no_storage_baseline(scenario)
    assert "hour 3" in str(exc_info.value)


def test_no_storage_peak_above_heuristic_peak(first_day_problem):
    from gridshave.optimizer import generation_profile, operator_heuristic

    p = first_day_problem
    g0 = generation_profile(np.zeros(24), p)
    heur = operator_heuristic(p)
    gh = generation_profile(heur.q_stor, p)
    gap = float(np.max(g0) - np.max(gh))
    assert 2.0 <= gap <= 4.0


# ---------------------------------------------------------------------------
# day handling

def test_split_days(synth_scenario):
    days = split_days(synth_scenario)
    assert len(days) == 3
    assert all(len(d) == 24 for d in days)
    assert np.array_equal(np.concatenate([d.p_base for d in days]),
                          synth_scenario.p_base)


def test_split_days_rejects_partial_days():
    with pytest.raises(ShapeError):
        split_days(_toy_scenario(70))
