"""Tests for reading trajectory CSVs and family profiles."""

import pandas as pd
import pytest

from src.pipeline.runner import EntropyTrajectory, ScaleRecord, format_trajectories_csv
from src.pipeline.summary import (
    PROFILE_COLUMNS,
    original_sizes,
    read_trajectories_csv,
    size_stratum,
    summarize_trajectories,
    write_profiles,
)
from src.utils.errors import CorpusInputError
from tests.analytics_fixtures import PROFILES, SCALES, planted_trajectories, write_planted


@pytest.mark.parametrize("n,stratum", [(10, "small"), (199, "small"), (200, "medium"), (600, "medium"), (601, "large")])
def test_size_stratum(n, stratum):
    assert size_stratum(n) == stratum


def test_read_back(tmp_path):
    df = read_trajectories_csv(write_planted(tmp_path / "trajectories.csv"))
    assert len(df) == 3 * 10 * 5
    assert set(df["family"]) == set(PROFILES)
    assert df["graph_id"].iloc[0] == "ba-000"


def test_missing_family_reads_as_empty(tmp_path):
    records = [ScaleRecord(scale=1.0, n_r=20, m_r=30, l_raw=50, l_norm=0.9)]
    path = tmp_path / "t.csv"
    path.write_text(format_trajectories_csv([EntropyTrajectory("g", None, 20, 30, 0, records)]))
    assert read_trajectories_csv(path)["family"].tolist() == [""]


def test_wrong_schema_is_rejected(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("graph_id,scale\ng,1\n")
    with pytest.raises(CorpusInputError):
        read_trajectories_csv(path)
    with pytest.raises(CorpusInputError):
        read_trajectories_csv(tmp_path / "absent.csv")


def test_original_sizes(tmp_path):
    df = read_trajectories_csv(write_planted(tmp_path / "t.csv"))
    sizes = original_sizes(df)
    assert len(sizes) == 30
    assert set(sizes.tolist()) == {100}


def test_profiles(tmp_path):
    df = read_trajectories_csv(write_planted(tmp_path / "t.csv"))
    profiles = summarize_trajectories(df)
    assert list(profiles.columns) == PROFILE_COLUMNS
    assert len(profiles) == 15
    assert set(profiles["stratum"]) == {"small"}
    assert (profiles["graphs"] == 10).all()
    for family, expected in PROFILES.items():
        rows = profiles[profiles["family"] == family]
        assert rows["scale"].tolist() == list(SCALES)
        assert rows["L_norm_mean"].to_numpy() == pytest.approx(expected, abs=0.02)


def test_failed_scales_are_left_out(tmp_path):
    trajectories = planted_trajectories(per_family=3)
    broken = trajectories[0]
    broken.records[3] = ScaleRecord(scale=0.4, status="failed:ContractError")
    df = read_trajectories_csv(write_planted(tmp_path / "t.csv", trajectories))
    profiles = summarize_trajectories(df).set_index(["family", "scale"])
    assert profiles.loc[("ba", 0.4), "graphs"] == 2
    assert profiles.loc[("ba", 0.6), "graphs"] == 3


def test_empty_table():
    assert list(summarize_trajectories(pd.DataFrame()).columns) == PROFILE_COLUMNS


def test_write_profiles(tmp_path):
    df = read_trajectories_csv(write_planted(tmp_path / "t.csv"))
    write_profiles(df, tmp_path / "profiles.csv")
    assert pd.read_csv(tmp_path / "profiles.csv").shape == (15, len(PROFILE_COLUMNS))
