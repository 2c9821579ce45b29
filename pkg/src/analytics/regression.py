"""Ordinary least squares, nested F-tests and the multiscale model ladder.

p-values come from the regularized incomplete beta function: for a t
statistic with d degrees of freedom the two-sided p is I_{d/(d+t²)}(d/2, 1/2),
and for an F statistic with (d1, d2) degrees of freedom the upper tail is
I_{d2/(d2+d1·F)}(d2/2, d1/2).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from loguru import logger
from scipy.special import betainc

from ..utils.errors import ParameterError, SingularDesignError, UsageError
from .features import FeatureMatrix

MIN_MODEL_ROWS = 10
CONST = "const"


def t_two_sided_p(t: np.ndarray, df: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(np.isinf(t), 0.0, df / (df + t * t))
    return betainc(df / 2.0, 0.5, x)


def f_upper_p(f: float, d1: float, d2: float) -> float:
    if f <= 0:
        return 1.0
    if np.isinf(f):
        return 0.0
    return float(betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))


@dataclass(frozen=True)
class RegressionFit:
    """Least-squares fit with classical inference."""

    names: tuple
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    r2: float
    adjusted_r2: float
    f_statistic: float
    prob_f: float
    residuals: np.ndarray
    fitted: np.ndarray
    rss: float
    n_obs: int
    intercept: bool

    @property
    def predictors(self) -> tuple:
        return tuple(n for n in self.names if not (self.intercept and n == CONST))

    @property
    def df_resid(self) -> int:
        return self.n_obs - len(self.names)

    def coefficient_table(self) -> Dict[str, Dict[str, float]]:
        return {
            name: {
                "coef": float(self.coefficients[i]),
                "std_err": float(self.std_errors[i]),
                "t": float(self.t_values[i]),
                "p": float(self.p_values[i]),
            }
            for i, name in enumerate(self.names)
        }

    def to_dict(self) -> Dict[str, object]:
        return {
            "predictors": list(self.predictors),
            "coefficients": self.coefficient_table(),
            "r2": self.r2,
            "adjusted_r2": self.adjusted_r2,
            "f_statistic": self.f_statistic,
            "prob_f": self.prob_f,
            "n_obs": self.n_obs,
        }


def ols(
    y: Sequence[float],
    x: Sequence[Sequence[float]],
    intercept: bool = True,
    names: Optional[Sequence[str]] = None,
) -> RegressionFit:
    """Fit y ~ x by least squares through a QR factorization.

    Args:
        y: Response, one value per row
        x: Predictor matrix (rows x columns); a 1-D array is one column
        intercept: Prepend a constant column named "const"
        names: Predictor names, x0, x1, ... by default

    Returns:
        RegressionFit

    Raises:
        ParameterError: If there are not more rows than fitted coefficients
        SingularDesignError: Naming the first column that is a linear
            combination of the ones before it
    """
    y = np.asarray(y, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != y.shape[0]:
        raise ParameterError(f"response has {y.shape[0]} rows but predictors have {x.shape[0]}")
    names = list(names) if names is not None else [f"x{j}" for j in range(x.shape[1])]
    if intercept:
        x = np.column_stack([np.ones(len(y)), x])
        names = [CONST] + names
    n, p = x.shape
    if n <= p:
        raise ParameterError(f"OLS needs more rows than coefficients ({n} rows, {p} coefficients)")

    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    tolerance = max(n, p) * np.finfo(float).eps * max(float(diag.max(initial=0.0)), 1.0)
    for j in range(p):
        if diag[j] <= tolerance:
            raise SingularDesignError(names[j])

    coefficients = scipy.linalg.solve_triangular(r, q.T @ y)
    fitted = x @ coefficients
    residuals = y - fitted
    rss = float(residuals @ residuals)
    df_resid = n - p

    r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
    sigma2 = rss / df_resid
    std_errors = np.sqrt(sigma2 * (r_inv**2).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(std_errors > 0, coefficients / std_errors, np.where(coefficients == 0, 0.0, np.inf))
    p_values = t_two_sided_p(np.abs(t_values), df_resid)

    centered = y - y.mean() if intercept else y
    tss = float(centered @ centered)
    r2 = 0.0 if tss == 0 else min(max(1.0 - rss / tss, 0.0), 1.0)
    k = p - 1 if intercept else p
    adjusted_r2 = 1.0 - (1.0 - r2) * (n - int(intercept)) / df_resid
    if k == 0:
        f_statistic, prob_f = float("nan"), float("nan")
    elif rss == 0:
        f_statistic, prob_f = float("inf"), 0.0
    else:
        f_statistic = max(tss - rss, 0.0) / k / (rss / df_resid)
        prob_f = f_upper_p(f_statistic, k, df_resid)

    return RegressionFit(
        names=tuple(names),
        coefficients=coefficients,
        std_errors=std_errors,
        t_values=t_values,
        p_values=p_values,
        r2=r2,
        adjusted_r2=adjusted_r2,
        f_statistic=f_statistic,
        prob_f=prob_f,
        residuals=residuals,
        fitted=fitted,
        rss=rss,
        n_obs=n,
        intercept=intercept,
    )


@dataclass(frozen=True)
class FTest:
    f_statistic: float
    p_value: float
    df_num: int
    df_den: int

    def to_dict(self) -> Dict[str, float]:
        return {"F": self.f_statistic, "p": self.p_value, "df_num": self.df_num, "df_den": self.df_den}


def nested_f_test(restricted: RegressionFit, full: RegressionFit, n_obs: int) -> FTest:
    """Compare a restricted model against a full model that contains it.

    F = ((RSS_r - RSS_f) / Δp) / (RSS_f / (n - p_f - 1))

    Raises:
        UsageError: If the models are not nested or were fitted on other data
    """
    if not set(restricted.names) <= set(full.names) or restricted.intercept != full.intercept:
        raise UsageError(f"models are not nested: {list(restricted.names)} vs {list(full.names)}")
    if restricted.n_obs != n_obs or full.n_obs != n_obs:
        raise UsageError(f"models were fitted on {restricted.n_obs} and {full.n_obs} rows, expected {n_obs}")

    df_num = len(full.names) - len(restricted.names)
    df_den = full.df_resid
    if df_num == 0:
        return FTest(0.0, 1.0, 0, df_den)
    if full.rss == 0:
        return FTest(float("inf"), 0.0, df_num, df_den)
    f_statistic = max(restricted.rss - full.rss, 0.0) / df_num / (full.rss / df_den)
    return FTest(f_statistic, f_upper_p(f_statistic, df_num, df_den), df_num, df_den)


@dataclass
class ModelLadder:
    """Models 1..m, model j using the first j scale columns as predictors."""

    fits: List[RegressionFit]
    f_test: FTest
    target: str = ""
    graph_ids: tuple = ()
    labels: tuple = ()
    y: np.ndarray = field(default_factory=lambda: np.empty(0))

    def to_dict(self) -> Dict[str, object]:
        return {
            "target": self.target,
            "n_obs": self.fits[0].n_obs,
            "models": [{"model": f"Model {i + 1}", **fit.to_dict()} for i, fit in enumerate(self.fits)],
            "f_test": {"restricted": "Model 1", "full": f"Model {len(self.fits)}", **self.f_test.to_dict()},
        }


def build_models_1_to_5(
    x: FeatureMatrix, y: Optional[Sequence[float]] = None, target: str = "aa_h100"
) -> ModelLadder:
    """Fit the nested models and test the largest against the smallest.

    Args:
        x: Feature matrix; its columns are added one model at a time
        y: Response; ``x.target`` when omitted
        target: Name recorded in the report

    Raises:
        ParameterError: With fewer than 10 complete rows or no response
    """
    if y is None:
        y = x.target
    if y is None:
        raise ParameterError("no regression response given")
    y = np.asarray(y, dtype=float)
    if x.rows < MIN_MODEL_ROWS:
        raise ParameterError(f"the model ladder needs at least {MIN_MODEL_ROWS} complete rows, got {x.rows}")

    fits = []
    for j in range(1, len(x.columns) + 1):
        columns = list(x.columns[:j])
        fits.append(ols(y, x.select(columns), intercept=True, names=columns))
    f_test = nested_f_test(fits[0], fits[-1], x.rows)
    logger.info(
        f"Model 1 R2={fits[0].r2:.5f}, Model {len(fits)} R2={fits[-1].r2:.5f}, "
        f"F={f_test.f_statistic:.4g} (p={f_test.p_value:.3g})"
    )
    return ModelLadder(fits=fits, f_test=f_test, target=target, graph_ids=x.graph_ids, labels=x.labels, y=y)


def report_table(ladder: ModelLadder) -> pd.DataFrame:
    """Coefficient rows with p-values in parentheses, then R², adjusted R² and Prob(F)."""
    names = list(ladder.fits[-1].names)
    table: Dict[str, List[str]] = {}
    for i, fit in enumerate(ladder.fits):
        cells = []
        coefficients = fit.coefficient_table()
        for name in names:
            entry = coefficients.get(name)
            cells.append(f"{entry['coef']:.5f} ({entry['p']:.3g})" if entry else "")
        cells += [f"{fit.r2:.5f}", f"{fit.adjusted_r2:.5f}", f"{fit.prob_f:.3g}"]
        table[f"Model {i + 1}"] = cells
    return pd.DataFrame(table, index=names + ["R2", "Adjusted R2", "Prob(F)"])


def predictions(ladder: ModelLadder) -> pd.DataFrame:
    """Actual response next to the predictions of the smallest and largest model."""
    first, last = ladder.fits[0], ladder.fits[-1]
    return pd.DataFrame(
        {
            "graph_id": list(ladder.graph_ids),
            "family": list(ladder.labels) if ladder.labels else [""] * len(ladder.y),
            "actual": ladder.y,
            "predicted_model_1": first.fitted,
            f"predicted_model_{len(ladder.fits)}": last.fitted,
        }
    )


def residuals_by_family(fit: RegressionFit, labels: Sequence[str]) -> pd.DataFrame:
    """Count, mean and standard deviation of residuals per family."""
    frame = pd.DataFrame({"family": list(labels), "residual": fit.residuals})
    summary = frame.groupby("family")["residual"].agg(["count", "mean", "std"]).reset_index()
    return summary.sort_values("family").reset_index(drop=True)
