"""
Run configuration: YAML file sections parsed into validated models.
"""

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union
import copy
import logging

import yaml
from pydantic import Field, field_validator

from .errors import ConfigurationError, MissingInputError, ParameterError
from .solver.presets import preset_params
from .types import (
    FrozenModel,
    GridSpec,
    NonnegMode,
    OpticsGeometry,
    PatchLayout,
    PhantomSpec,
    SolverParams,
    WindowMode,
)

logger = logging.getLogger(__name__)

LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class SolverSection(FrozenModel):
    """
    A named preset plus explicit overrides. Without a preset all of
    n_outer, n_inner, mu, tau and gamma must be given.
    """
    preset: Optional[str] = Field(default="bead", description="Named parameter set")
    n_outer: Optional[int] = None
    n_inner: Optional[int] = None
    mu: Optional[float] = None
    tau: Optional[float] = None
    gamma: Optional[float] = None
    nonneg_mode: Optional[NonnegMode] = None
    tol_fupdate: Optional[float] = None

    def params(self) -> SolverParams:
        explicit = self.model_dump(exclude={"preset"}, exclude_none=True)
        if self.preset:
            return preset_params(self.preset, **explicit)
        return SolverParams(**explicit)


class PatchSection(FrozenModel):
    enabled: bool = Field(default=False, description="Regularise patch by patch")
    patch: int = 64
    stride: int = 32
    mode: WindowMode = WindowMode.PARTITION_OF_UNITY

    def layout(self) -> PatchLayout:
        return PatchLayout(patch=self.patch, stride=self.stride, mode=self.mode)


class OutputSection(FrozenModel):
    directory: str = Field(default=".", description="Where command outputs are written")
    log_level: str = Field(default="INFO", description="Logging level")
    threads: Optional[int] = Field(default=None, ge=1, description="Worker cap for FFTs and pools")
    seed: Optional[int] = Field(
        default=None, ge=0, description="Run seed; replaces phantom.seed when set"
    )

    @field_validator("log_level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        value = value.upper()
        if value not in LOG_LEVELS:
            raise ValueError(f"Invalid log_level: {value}")
        return value


class RunConfig(FrozenModel):
    """Every section of a run, validated together before any computation."""

    grid: GridSpec = Field(
        default_factory=lambda: GridSpec(nx=64, ny=64, nz=64, dx=0.1, dy=0.1, dz=0.2)
    )
    optics: OpticsGeometry = Field(default_factory=OpticsGeometry)
    phantom: PhantomSpec = Field(default_factory=PhantomSpec)
    solver: SolverSection = Field(default_factory=SolverSection)
    patch: PatchSection = Field(default_factory=PatchSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def __init__(self, **data: Any):
        super().__init__(**data)
        # Resolve derived models now so a bad preset or layout fails up front
        self.solver.params()
        self.patch.layout()

    def solver_params(self) -> SolverParams:
        return self.solver.params()

    def phantom_spec(self) -> PhantomSpec:
        """Phantom with the run seed applied when one is set."""
        if self.output.seed is None:
            return self.phantom
        return self.phantom.model_copy(update={"seed": self.output.seed})

    def output_path(self, name: Union[str, Path]) -> Path:
        path = Path(name)
        return path if path.is_absolute() else Path(self.output.directory) / path


def default_run_config() -> RunConfig:
    """Bead at 64^3 with the bead preset."""
    return RunConfig()


def _deep_merge(base: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Read a YAML run configuration and apply overrides (flags win).

    Raises:
        MissingInputError: path does not exist
        ConfigurationError: YAML syntax, unknown keys or invalid values
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise MissingInputError("configuration file not found", str(path)) from None
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"{path}: invalid YAML: {e}") from e
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping of sections")
        raw = loaded

    merged = _deep_merge(raw, overrides or {})
    try:
        cfg = RunConfig(**merged)
    except ParameterError as e:
        if path is not None:
            raise ParameterError(f"{path}: {e}", e.parameter_name) from e
        raise
    logger.debug(f"Loaded run configuration from {path or 'defaults'}")
    return cfg


def dump_run_config(cfg: RunConfig) -> str:
    """YAML text that load_run_config reads back to an equal RunConfig."""
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False, default_flow_style=None)


def configure_logging(level: str = "INFO") -> None:
    """Configure root logging once, on stderr."""
    level = level.upper()
    if level not in LOG_LEVELS:
        raise ParameterError(f"Invalid log_level: {level}", "log_level")
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, force=True)
