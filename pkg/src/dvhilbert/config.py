"""
Configuration: process settings from the environment and the sectioned
config file read by the CLI.
"""

import configparser
import io
import math
import os
from functools import lru_cache
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .schemas import IntegrationSpec, NormMethod, OutputFormat, Precision, format_p, parse_p

load_dotenv()

# in-process SQLite; an empty URL disables the spectrum cache
DEFAULT_CACHE_URL = "sqlite://"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    workers: int = Field(1, ge=1)
    precision: Precision = Precision.DOUBLE
    cache_url: str = DEFAULT_CACHE_URL
    memory_budget_mb: int = Field(2048, ge=1)
    log_level: str = "WARNING"
    grid_depth: int = Field(24, ge=10, le=52)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build settings from DVHILBERT_* environment variables."""
    try:
        return Settings(
            workers=int(os.getenv("DVHILBERT_WORKERS", os.cpu_count() or 1)),
            precision=os.getenv("DVHILBERT_PRECISION", Precision.DOUBLE.value),
            cache_url=os.getenv("DVHILBERT_CACHE_URL", DEFAULT_CACHE_URL),
            memory_budget_mb=int(os.getenv("DVHILBERT_MEMORY_BUDGET_MB", "2048")),
            log_level=os.getenv("DVHILBERT_LOG_LEVEL", "WARNING").upper(),
            grid_depth=int(os.getenv("DVHILBERT_GRID_DEPTH", "24")),
        )
    except (ValueError, ValidationError) as exc:
        raise ConfigError(f"invalid environment setting: {exc}", "config") from exc


def _split(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WeightsSection(_Section):
    specs: List[str] = Field(default_factory=lambda: ["std:1"], min_length=1)
    depth: int = Field(24, ge=10, le=52)
    precision: Precision = Precision.DOUBLE

    @field_validator("specs", mode="before")
    @classmethod
    def split_specs(cls, value):
        return _split(value)


class SymbolsSection(_Section):
    specs: List[str] = Field(default_factory=lambda: ["pow:0.75"], min_length=1)
    n_max: int = Field(20, ge=1, le=60)
    method: NormMethod = NormMethod.BLOCKS

    @field_validator("specs", mode="before")
    @classmethod
    def split_specs(cls, value):
        return _split(value)


class SweepSection(_Section):
    p_list: List[float] = Field(default_factory=lambda: [1.0, 2.0, math.inf], min_length=1)
    n_list: List[int] = Field(default_factory=lambda: [64, 256, 1024], min_length=1)
    workers: Optional[int] = Field(None, ge=1)
    hilbert_d: int = Field(64, ge=1, le=64)
    hilbert_j: int = Field(64, ge=1)

    @field_validator("p_list", mode="before")
    @classmethod
    def parse_p_list(cls, value):
        return [parse_p(item) for item in _split(value)]

    @field_validator("p_list")
    @classmethod
    def check_positive_p(cls, value):
        if any(not p > 0 for p in value):
            raise ValueError("p must be positive")
        return value

    @field_validator("n_list", mode="before")
    @classmethod
    def parse_n_list(cls, value):
        return [int(item) for item in _split(value)]

    @field_validator("n_list")
    @classmethod
    def check_increasing(cls, value):
        if any(b <= a for a, b in zip(value, value[1:])) or value[0] < 2:
            raise ValueError("N values must be >= 2 and strictly increasing")
        return value

    @field_validator("workers", mode="before")
    @classmethod
    def blank_workers(cls, value):
        return None if value in ("", None) else value


class TolerancesSection(_Section):
    """Verification tolerances.

    abs_tol, rel_tol and max_panels drive the quadrature the verify suites run
    themselves (moments by quadrature, Hardy-Littlewood integrals). Library
    internals such as tails and moments keep their own tighter settings.
    truncation is the dropped row-mass share above which sweep rows count as
    unconverged.
    """

    abs_tol: float = Field(1e-12, gt=0)
    rel_tol: float = Field(1e-10, gt=0)
    max_panels: int = Field(500, ge=4)
    svd_tol: float = Field(1e-12, gt=0)
    stabilization: float = Field(0.02, gt=0)
    spread: float = Field(8.0, gt=1)
    bracket: float = Field(10.0, gt=1)
    truncation: float = Field(1e-6, gt=0)

    def integration_spec(self) -> IntegrationSpec:
        return IntegrationSpec(abs_tol=self.abs_tol, rel_tol=self.rel_tol, max_panels=self.max_panels)


class OutputSection(_Section):
    format: OutputFormat = OutputFormat.PLAIN
    path: Optional[str] = None

    @field_validator("path", mode="before")
    @classmethod
    def blank_path(cls, value):
        return None if value in ("", "-", None) else value


class CliConfig(_Section):
    weights: WeightsSection = Field(default_factory=WeightsSection)
    symbols: SymbolsSection = Field(default_factory=SymbolsSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def merged(self, overrides: dict) -> "CliConfig":
        """Apply flag overrides given as {section: {key: value}}."""
        data = self.model_dump()
        for section, values in overrides.items():
            for key, value in values.items():
                if value is not None:
                    data[section][key] = value
        return load_config_dict(data)


def load_config_dict(data: dict) -> CliConfig:
    try:
        return CliConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc), "config") from exc


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"])
        parts.append(f"[{location}] {error['msg']}")
    return "; ".join(parts)


def parse_config_text(text: str) -> CliConfig:
    """Parse INI text; unknown sections or keys are rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}", "config") from exc
    known = set(CliConfig.model_fields)
    unknown = [name for name in parser.sections() if name not in known]
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}", "config")
    data = {name: dict(parser.items(name)) for name in parser.sections()}
    return load_config_dict(data)


def load_config_file(path: str) -> CliConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_config_text(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", "config") from exc


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, list):
        return ",".join(_format_value(item) for item in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_p(value) if math.isinf(value) else repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def dump_config(config: CliConfig) -> str:
    """Render the resolved config as INI text that parses back identically."""
    parser = configparser.ConfigParser(interpolation=None)
    for section in CliConfig.model_fields:
        model = getattr(config, section)
        parser[section] = {key: _format_value(getattr(model, key)) for key in type(model).model_fields}
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()
