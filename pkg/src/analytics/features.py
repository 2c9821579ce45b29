"""Feature matrices built from trajectory CSVs."""

import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..utils.config import DEFAULT_SCALES
from ..utils.errors import UsageError

VALUE_COLUMNS = ("L_norm", "H_norm")

# "aa_h100" is the Adamic-Adar link-prediction entropy H* at 100% scale
_TARGET_PATTERN = re.compile(r"^(aa|jac)_h(\d{1,3})$")
TARGET_SCORERS = {"aa": "adamic-adar", "jac": "jaccard"}


def scale_column(scale: float) -> str:
    """Column name of a scale, e.g. 0.8 -> "H_80"."""
    return f"H_{int(round(scale * 100))}"


@dataclass(frozen=True)
class FeatureMatrix:
    """One row per graph, one column per scale.

    Rows with a missing value (failed scale, or missing target) are left
    out and counted in ``dropped``.
    """

    graph_ids: Tuple[str, ...]
    columns: Tuple[str, ...]
    values: np.ndarray
    labels: Tuple[str, ...] = ()
    target: Optional[np.ndarray] = None
    dropped: int = 0

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_array(
        cls,
        values: Sequence[Sequence[float]],
        labels: Optional[Sequence[str]] = None,
        columns: Optional[Sequence[str]] = None,
        target: Optional[Sequence[float]] = None,
    ) -> "FeatureMatrix":
        """Wrap an in-memory array; graph ids are row numbers."""
        data = np.atleast_2d(np.asarray(values, dtype=float))
        if columns is None:
            columns = [scale_column(s) for s in DEFAULT_SCALES[: data.shape[1]]]
            if len(columns) < data.shape[1]:
                columns = [f"x{j}" for j in range(data.shape[1])]
        return cls(
            graph_ids=tuple(str(i) for i in range(data.shape[0])),
            columns=tuple(columns),
            values=data,
            labels=tuple(labels) if labels is not None else (),
            target=np.asarray(target, dtype=float) if target is not None else None,
        )

    def select(self, columns: Sequence[str]) -> np.ndarray:
        """Values of the named columns, in the given order."""
        index = [self.columns.index(c) for c in columns]
        return self.values[:, index]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.columns), index=list(self.graph_ids))
        frame.index.name = "graph_id"
        if self.labels:
            frame.insert(0, "family", list(self.labels))
        return frame


class RegressionTarget(NamedTuple):
    """A link-prediction entropy at one scale, produced by one scorer."""

    value: str
    scale: float
    scorer: str


def parse_target(target: str) -> RegressionTarget:
    """Map a target name like "aa_h100" to its value column, scale and scorer.

    Raises:
        UsageError: For an unknown target name
    """
    match = _TARGET_PATTERN.match(target)
    if not match or not 0 < int(match.group(2)) <= 100:
        raise UsageError(
            f"unknown regression target '{target}', expected aa_h<percent> or jac_h<percent> such as aa_h100"
        )
    return RegressionTarget("H_norm", int(match.group(2)) / 100.0, TARGET_SCORERS[match.group(1)])


def _check_scorer(df: pd.DataFrame, wanted: RegressionTarget, target: str) -> None:
    if "scorer" not in df.columns:
        return
    rows = df[(df["scale"] == wanted.scale) & df[wanted.value].notna()]
    recorded = sorted(set(rows["scorer"].astype(str)) - {""})
    if recorded and recorded != [wanted.scorer]:
        raise UsageError(
            f"target '{target}' needs {wanted.scorer} link-prediction entropy, "
            f"but the trajectories were scored with {', '.join(recorded)}"
        )


def feature_matrix(
    df: pd.DataFrame,
    value: str = "L_norm",
    scales: Optional[Sequence[float]] = None,
    target: Optional[str] = None,
) -> FeatureMatrix:
    """Pivot a trajectory table into a feature matrix.

    Args:
        df: Trajectory table as read by ``read_trajectories_csv``
        value: "L_norm" (structural entropy) or "H_norm" as predictors
        scales: Scales to use as columns, largest first; all scales in ``df`` by default
        target: Optional regression target such as "aa_h100"

    Returns:
        FeatureMatrix with complete rows only, in order of first appearance

    Raises:
        UsageError: On an unknown value column or target, or a target whose
            scorer differs from the one recorded in ``df``
    """
    if value not in VALUE_COLUMNS:
        raise UsageError(f"unknown feature value '{value}', expected one of {VALUE_COLUMNS}")
    if scales is None:
        scales = sorted(df["scale"].unique(), reverse=True)
    scales = [float(s) for s in scales]
    order = list(dict.fromkeys(df["graph_id"]))

    usable = df[~df["status"].astype(str).str.startswith("failed")]
    wide = usable.pivot_table(index="graph_id", columns="scale", values=value, aggfunc="first")
    wide = wide.reindex(index=order, columns=scales)

    if target is not None:
        wanted = parse_target(target)
        _check_scorer(usable, wanted, target)
        y = usable[usable["scale"] == wanted.scale].set_index("graph_id")[wanted.value]
        wide["__target__"] = y.reindex(order)

    families = df.drop_duplicates("graph_id").set_index("graph_id")["family"].reindex(order).fillna("")
    complete = wide.notna().all(axis=1)
    dropped = int((~complete).sum())
    if dropped:
        logger.warning(f"Dropped {dropped} of {len(order)} graphs with missing {value} values")
    wide = wide[complete]

    y_values = None
    if target is not None:
        y_values = wide.pop("__target__").to_numpy(dtype=float)
    return FeatureMatrix(
        graph_ids=tuple(wide.index),
        columns=tuple(scale_column(s) for s in scales),
        values=wide.to_numpy(dtype=float),
        labels=tuple(families[wide.index]),
        target=y_values,
        dropped=dropped,
    )
