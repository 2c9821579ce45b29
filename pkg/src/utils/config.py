"""Run configuration.

Defaults are overridden by environment variables (a ``.env`` file is honoured
through python-dotenv), then by a JSON config file, then by command line flags.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv
from loguru import logger

from .errors import UsageError

DEFAULT_SCALES: Tuple[float, ...] = (1.0, 0.8, 0.6, 0.4, 0.2)
SCORERS = ("jaccard", "adamic-adar")
COARSENING_FAMILIES = ("edge", "neighborhood")
COARSENING_COSTS = ("local_variation", "energy")
TIE_MODES = ("optimistic", "mean")

SEED_MASK = (1 << 64) - 1

# Environment variable -> (config field, parser)
_ENV_FIELDS = {
    "MSENT_SEED": ("seed", int),
    "MSENT_WORKERS": ("workers", int),
    "MSENT_REPLICAS": ("replicas", int),
    "MSENT_SCORER": ("scorer", str),
    "MSENT_BUDGET": ("budget", float),
    "MSENT_FAMILY": ("family", str),
    "MSENT_COST": ("cost", str),
}


def _default_workers() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every subcommand."""

    seed: Optional[int] = None
    scales: Tuple[float, ...] = DEFAULT_SCALES
    scorer: str = "adamic-adar"
    family: str = "edge"
    cost: str = "local_variation"
    k: Optional[int] = None
    replicas: int = 10
    budget: Optional[float] = None
    out: Path = Path("results")
    workers: int = field(default_factory=_default_workers)
    max_levels: int = 20
    max_level_reduction: float = 0.35
    chained: bool = False
    tie_mode: str = "optimistic"
    link_prediction: bool = True

    def __post_init__(self) -> None:
        scales = tuple(sorted((float(s) for s in self.scales), reverse=True))
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "out", Path(self.out))
        self.validate()

    def validate(self) -> None:
        """Check field ranges.

        Raises:
            UsageError: If any field is out of range
        """
        if not self.scales:
            raise UsageError("at least one scale is required")
        if len(set(self.scales)) != len(self.scales):
            raise UsageError(f"scales must be unique: {list(self.scales)}")
        for s in self.scales:
            if not 0.0 < s <= 1.0:
                raise UsageError(f"scale {s} outside (0, 1]")
        if self.scorer not in SCORERS:
            raise UsageError(f"unknown scorer '{self.scorer}', expected one of {SCORERS}")
        if self.family not in COARSENING_FAMILIES:
            raise UsageError(f"unknown coarsening family '{self.family}'")
        if self.cost not in COARSENING_COSTS:
            raise UsageError(f"unknown coarsening cost '{self.cost}', expected one of {COARSENING_COSTS}")
        if self.tie_mode not in TIE_MODES:
            raise UsageError(f"unknown tie mode '{self.tie_mode}'")
        if self.replicas < 1:
            raise UsageError("replicas must be at least 1")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        if self.k is not None and self.k < 1:
            raise UsageError("k must be at least 1")
        if self.budget is not None and self.budget <= 0:
            raise UsageError("budget must be positive")
        if not 0.0 < self.max_level_reduction < 1.0:
            raise UsageError("max level reduction must lie in (0, 1)")
        if self.seed is not None and not 0 <= self.seed <= SEED_MASK:
            raise UsageError("seed must be a 64-bit unsigned integer")

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Return a copy with every non-None override applied."""
        values = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **values)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["scales"] = list(self.scales)
        data["out"] = str(self.out)
        return data


def _from_environment() -> Dict[str, Any]:
    load_dotenv()
    values: Dict[str, Any] = {}
    for var, (name, parse) in _ENV_FIELDS.items():
        raw = os.environ.get(var)
        if raw is None or raw == "":
            continue
        try:
            values[name] = parse(raw)
        except ValueError as e:
            raise UsageError(f"invalid value for {var}: {raw!r}") from e
    return values


def _from_file(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"invalid JSON in {path}: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {unknown}")
    if "scales" in data:
        data["scales"] = tuple(data["scales"])
    return data


def load_config(config_path: Optional[Path] = None, **flags: Any) -> RunConfig:
    """Resolve the run configuration.

    Args:
        config_path: Optional JSON config file
        **flags: Command line values; None means "not given"

    Returns:
        RunConfig: The merged configuration

    Raises:
        UsageError: If a source holds an invalid value
    """
    values: Dict[str, Any] = {}
    values.update(_from_environment())
    if config_path is not None:
        values.update(_from_file(Path(config_path)))
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        config = RunConfig(**values)
    except TypeError as e:
        raise UsageError(str(e)) from e
    logger.debug(f"Resolved configuration: {config.to_dict()}")
    return config


def resolve_seed(seed: Optional[int]) -> Tuple[int, bool]:
    """Return a usable seed and whether it was freshly drawn."""
    if seed is not None:
        return int(seed) & SEED_MASK, False
    drawn = int(np.random.SeedSequence().entropy) & SEED_MASK
    return drawn, True


def stable_key(text: str) -> int:
    """Hash a string to a 64-bit integer that is stable across processes."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_seed(base: int, *keys: int) -> int:
    """Derive a child seed from a base seed and integer keys."""
    words = [int(base) & SEED_MASK] + [int(k) & SEED_MASK for k in keys]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])


def parse_scales(text: Optional[str]) -> Optional[Sequence[float]]:
    """Parse a comma separated list of scale fractions."""
    if text is None:
        return None
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise UsageError(f"invalid scale list: {text!r}") from e
