"""
codedcomp Configuration Management

Centralized configuration for coded-computation experiments: numeric
tolerances, Monte-Carlo budgets, parallelism and workspace layout.
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError, InputError

# Load environment variables
load_dotenv()

TEMPLATE_DIR = Path(__file__).parent / "templates"


def _default_n_max() -> Dict[str, int]:
    return {"3,2": 1, "4,2": 2, "5,3": 2, "6,3": 3}


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("1", "true", "yes")


@dataclass
class CodedCompConfig:
    """Main configuration class for codedcomp runs."""

    # Core settings
    workspace_path: str = "./workspace"
    seed: int = 2021
    log_level: str = "INFO"

    # Monte-Carlo budgets
    enum_limit: int = 100_000
    mc_trials: int = 100_000
    rejection_budget: int = 1000
    chunk_size: int = 1024
    workers: int = 1

    # Numerics
    max_kronecker_level: int = 13
    mds_pivot_tolerance: float = 1e-10
    singular_floor: float = 1e-300
    quad_abs_tol: float = 1e-6
    quad_tail_tol: float = 1e-8
    consistency_rtol: float = 1e-6
    certify_rank_deficiency: bool = True

    # Projective decoder iteration caps, keyed "m,r"
    default_n_max: Dict[str, int] = field(default_factory=_default_n_max)

    cache_enabled: bool = True

    @classmethod
    def from_env(cls) -> "CodedCompConfig":
        """Create configuration from CODEDCOMP_* environment variables."""
        n_max = _default_n_max()
        if os.getenv("CODEDCOMP_DEFAULT_N_MAX"):
            # "3,2=1;4,2=2"
            for item in os.getenv("CODEDCOMP_DEFAULT_N_MAX", "").split(";"):
                if "=" in item:
                    key, value = item.split("=", 1)
                    n_max[key.strip()] = int(value)

        try:
            return cls(
                workspace_path=os.getenv("CODEDCOMP_WORKSPACE", "./workspace"),
                seed=int(os.getenv("CODEDCOMP_SEED", "2021")),
                log_level=os.getenv("CODEDCOMP_LOG_LEVEL", "INFO").upper(),
                enum_limit=int(os.getenv("CODEDCOMP_ENUM_LIMIT", "100000")),
                mc_trials=int(os.getenv("CODEDCOMP_MC_TRIALS", "100000")),
                rejection_budget=int(os.getenv("CODEDCOMP_REJECTION_BUDGET", "1000")),
                chunk_size=int(os.getenv("CODEDCOMP_CHUNK_SIZE", "1024")),
                workers=int(os.getenv("CODEDCOMP_WORKERS", "1")),
                max_kronecker_level=int(os.getenv("CODEDCOMP_MAX_KRONECKER_LEVEL", "13")),
                mds_pivot_tolerance=float(os.getenv("CODEDCOMP_MDS_PIVOT_TOLERANCE", "1e-10")),
                singular_floor=float(os.getenv("CODEDCOMP_SINGULAR_FLOOR", "1e-300")),
                quad_abs_tol=float(os.getenv("CODEDCOMP_QUAD_ABS_TOL", "1e-6")),
                quad_tail_tol=float(os.getenv("CODEDCOMP_QUAD_TAIL_TOL", "1e-8")),
                consistency_rtol=float(os.getenv("CODEDCOMP_CONSISTENCY_RTOL", "1e-6")),
                certify_rank_deficiency=_env_bool("CODEDCOMP_CERTIFY_RANK", "true"),
                default_n_max=n_max,
                cache_enabled=_env_bool("CODEDCOMP_CACHE", "true"),
            )
        except ValueError as e:
            raise ConfigError(f"Cannot parse environment configuration: {e}") from e

    def validate(self) -> bool:
        """Validate the configuration; all problems are reported together."""
        errors = []

        workspace = Path(self.workspace_path)
        if not workspace.exists():
            try:
                workspace.mkdir(parents=True, exist_ok=True)
            except Exception as e:
                errors.append(f"Cannot create workspace directory: {e}")

        if self.seed < 0:
            errors.append("Seed must be non-negative")

        for name in ("enum_limit", "mc_trials", "rejection_budget", "chunk_size", "workers"):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be positive")

        if not 1 <= self.max_kronecker_level <= 20:
            errors.append("max_kronecker_level must be between 1 and 20")

        for name in ("mds_pivot_tolerance", "singular_floor", "quad_abs_tol", "quad_tail_tol", "consistency_rtol"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be positive")

        valid_levels = ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]
        if self.log_level.upper() not in valid_levels:
            errors.append(f"Log level must be one of: {', '.join(valid_levels)}")

        for key, value in self.default_n_max.items():
            parts = key.split(",")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                errors.append(f"default_n_max key '{key}' must look like 'm,r'")
            if int(value) < 1:
                errors.append(f"default_n_max[{key}] must be at least 1")

        if errors:
            raise ConfigError(f"Configuration validation failed: {'; '.join(errors)}")

        return True

    def n_max_for(self, m: int, r: int) -> Optional[int]:
        """Configured iteration cap for RM(m, r), or None to use the decoder default."""
        value = self.default_n_max.get(f"{m},{r}")
        return int(value) if value is not None else None

    @property
    def cache_dir(self) -> Path:
        return Path(self.workspace_path) / "cache"

    @property
    def logs_dir(self) -> Path:
        return Path(self.workspace_path) / "logs"

    @property
    def results_dir(self) -> Path:
        return Path(self.workspace_path) / "results"

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return asdict(self)

    def save_to_file(self, filepath: Path) -> None:
        """Save configuration to file."""
        with open(filepath, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_from_file(cls, filepath: Path) -> "CodedCompConfig":
        """Load configuration from file."""
        with open(filepath, "r") as f:
            config_dict = json.load(f)

        return cls._from_dict(config_dict, source=str(filepath))

    @classmethod
    def _from_dict(cls, config_dict: Dict[str, Any], source: str) -> "CodedCompConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(config_dict) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration keys in {source}: {', '.join(unknown)}")
        return cls(**config_dict)

    @classmethod
    def load_template(cls, template_name: str) -> "CodedCompConfig":
        """Load configuration from a template in the templates directory."""
        template_path = TEMPLATE_DIR / f"{template_name}.json"

        if not template_path.exists():
            available = cls.list_templates()
            raise ConfigError(
                f"Template '{template_name}' not found. Available templates: {', '.join(available)}"
            )

        with open(template_path, "r") as f:
            config_dict = json.load(f)

        return cls._from_dict(config_dict, source=template_name)

    @classmethod
    def list_templates(cls) -> List[str]:
        """List all available configuration templates."""
        return sorted(f.stem for f in TEMPLATE_DIR.glob("*.json") if f.is_file())

    @classmethod
    def create_development(cls, **kwargs) -> "CodedCompConfig":
        """Development configuration with small budgets."""
        config = cls.load_template("development")
        for key, value in kwargs.items():
            if hasattr(config, key):
                setattr(config, key, value)
        return config


EXPERIMENT_COMMANDS = ("analyze", "bler", "asymptotic", "stability", "simulate")


def parse_eps_grid(spec: str) -> np.ndarray:
    """Linear grid from "start:stop:count", endpoints inclusive."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise InputError(f"erasure grid must look like start:stop:count, got '{spec}'")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise InputError(f"cannot parse erasure grid '{spec}': {e}") from e
    if count < 1:
        raise InputError("erasure grid needs at least one point")
    if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
        raise InputError("erasure grid endpoints must lie in [0, 1]")
    if count == 1 and start != stop:
        raise InputError("a single-point erasure grid needs start == stop")
    return np.linspace(start, stop, count)


def parse_payload(spec: str) -> Tuple[int, int, int]:
    """"rows x inner x cols" for A (rows x inner) times B (inner x cols)."""
    try:
        dims = tuple(int(p) for p in spec.lower().split("x"))
    except ValueError as e:
        raise InputError(f"cannot parse payload '{spec}': {e}") from e
    if len(dims) != 3 or min(dims) < 1:
        raise InputError(f"payload must be three positive sizes like 128x32x16, got '{spec}'")
    return dims[0], dims[1], dims[2]


class ExperimentConfig(BaseModel):
    """One fully specified experiment; echoed into every output header."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["analyze", "bler", "asymptotic", "stability", "simulate"]
    scheme: Optional[str] = None
    code: Optional[str] = None
    decoder: str = "both"
    n: List[int] = Field(default_factory=list)
    m: Optional[int] = None
    r: Optional[int] = None
    k: Optional[int] = None
    mu: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=1.0, gt=0)
    dist: Literal["exponential", "weibull"] = "exponential"
    eps: Optional[str] = None
    eps_design: float = Field(default=0.1, gt=0, lt=1)
    trials: int = Field(default=100_000, ge=1)
    jobs: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=2021, ge=0)
    n_max: Optional[int] = Field(default=None, ge=1)
    payload: Optional[str] = None
    sub_k: Optional[int] = Field(default=None, ge=1)
    patterns_per_eps: int = Field(default=1000, ge=1)
    rm_max_n: int = Field(default=0, ge=0)
    max_evaluations: Optional[int] = Field(default=None, ge=1)
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    @field_validator("n")
    @classmethod
    def _positive_lengths(cls, value: List[int]) -> List[int]:
        if any(v < 1 for v in value):
            raise ValueError("code lengths must be positive")
        return value

    @field_validator("eps")
    @classmethod
    def _grid_parses(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            parse_eps_grid(value)
        return value

    @field_validator("payload")
    @classmethod
    def _payload_parses(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            parse_payload(value)
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.dist == "exponential" and self.alpha != 1.0:
            raise ValueError("alpha applies to the weibull distribution only")
        if self.m is not None and self.m < 0:
            raise ValueError("m must be non-negative")
        if self.r is not None and self.m is not None and not 0 <= self.r <= self.m:
            raise ValueError("r must satisfy 0 <= r <= m")
        return self

    def eps_grid(self, default: str = "0:0.6:61") -> np.ndarray:
        return parse_eps_grid(self.eps or default)

    def payload_shape(self) -> Optional[Tuple[int, int, int]]:
        return parse_payload(self.payload) if self.payload else None

    @property
    def lengths(self) -> List[int]:
        """Requested code lengths, falling back to 2^m."""
        if self.n:
            return list(self.n)
        if self.m is not None:
            return [2**self.m]
        return []

    def job_count(self) -> int:
        """Timing runs default to 1e5 jobs, payload runs to a single job."""
        if self.jobs is not None:
            return self.jobs
        return 1 if self.payload else 100_000
