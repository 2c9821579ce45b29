"""Family and size-stratum profiles of trajectory CSVs."""

from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from ..utils.errors import CorpusInputError
from .runner import SCHEMA_LINE, TRAJECTORY_COLUMNS

# Upper node-count bounds of the small and medium strata
SMALL_MAX = 200
MEDIUM_MAX = 600

PROFILE_COLUMNS = [
    "family",
    "stratum",
    "scale",
    "graphs",
    "L_norm_mean",
    "L_norm_std",
    "H_norm_mean",
    "H_norm_std",
]


def size_stratum(n: int) -> str:
    """small below 200 nodes, large above 600, medium otherwise."""
    if n < SMALL_MAX:
        return "small"
    if n <= MEDIUM_MAX:
        return "medium"
    return "large"


def read_trajectories_csv(path: Path) -> pd.DataFrame:
    """Load a trajectory CSV written by the pipeline.

    Raises:
        CorpusInputError: If the file is missing or has another schema
    """
    path = Path(path)
    if not path.exists():
        raise CorpusInputError(f"trajectory file not found: {path}")
    with path.open(encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
    if first != SCHEMA_LINE:
        raise CorpusInputError(f"{path} is not a trajectory CSV (expected '{SCHEMA_LINE}', got '{first}')")
    df = pd.read_csv(
        path, skiprows=1, dtype={"graph_id": str, "family": str, "scorer": str, "status": str}
    )
    missing = [c for c in TRAJECTORY_COLUMNS if c not in df.columns]
    if missing:
        raise CorpusInputError(f"{path} lacks columns {missing}")
    df["family"] = df["family"].fillna("")
    df["scorer"] = df["scorer"].fillna("")
    return df


def original_sizes(df: pd.DataFrame) -> pd.Series:
    """Node count of each graph before reduction, recovered from its largest scale."""
    ok = df[df["n_r"].notna()]
    top = ok.loc[ok.groupby("graph_id")["scale"].idxmax()]
    return pd.Series(
        np.rint(top["n_r"].to_numpy() / top["scale"].to_numpy()).astype(int),
        index=top["graph_id"].to_numpy(),
    )


def summarize_trajectories(df: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation of L* and H* per family, size stratum and scale."""
    if df.empty:
        return pd.DataFrame(columns=PROFILE_COLUMNS)
    sizes = original_sizes(df)
    usable = df[~df["status"].str.startswith("failed")].copy()
    usable["stratum"] = usable["graph_id"].map(lambda gid: size_stratum(int(sizes[gid])))
    grouped = usable.groupby(["family", "stratum", "scale"], sort=True)
    profiles = grouped.agg(
        graphs=("graph_id", "nunique"),
        L_norm_mean=("L_norm", "mean"),
        L_norm_std=("L_norm", "std"),
        H_norm_mean=("H_norm", "mean"),
        H_norm_std=("H_norm", "std"),
    ).reset_index()
    profiles = profiles.sort_values(["family", "stratum", "scale"], ascending=[True, True, False])
    return profiles[PROFILE_COLUMNS].reset_index(drop=True)


def write_profiles(df: pd.DataFrame, path: Path) -> pd.DataFrame:
    profiles = summarize_trajectories(df)
    profiles.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    logger.info(f"Wrote {len(profiles)} profile rows to {path}")
    return profiles
