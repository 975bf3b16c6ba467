"""Solver configuration management.

This module loads, validates and saves the settings shared by all
subcommands: run budgets and the root seed, criterion search limits, the edge
packing oracle, Ramsey sampling and the batch worker count.
"""

import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

try:
    import tomllib
except ImportError:
    import tomli as tomllib

from mt_engine.criteria import (
    CHECK_TOLERANCE,
    DEFAULT_DIVERGENCE_CAP,
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_MAX_ITERS,
)
from mt_engine.parallel import DEFAULT_MAX_ROUNDS, VcmepAlgorithm
from mt_engine.sequential import DEFAULT_MAX_STEPS, DEFAULT_SEED
from utils.parallel_processor import WORKERS_ENV_VAR, default_workers

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Seed and budgets of sequential and parallel runs."""

    seed: int = DEFAULT_SEED
    max_steps: int = DEFAULT_MAX_STEPS
    max_rounds: int = DEFAULT_MAX_ROUNDS
    runs: int = 100


@dataclass
class CriteriaConfig:
    """Criterion checking and weight search limits."""

    epsilon: float = 0.0
    max_iters: int = DEFAULT_MAX_ITERS
    divergence_cap: float = DEFAULT_DIVERGENCE_CAP
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    tolerance: float = CHECK_TOLERANCE


@dataclass
class VcmepConfig:
    """Edge packing oracle used by the parallel algorithm."""

    algorithm: str = VcmepAlgorithm.GREEDY.value


@dataclass
class RamseyConfigSection:
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    samples: int = 1


@dataclass
class BatchConfig:
    workers: int = field(default_factory=default_workers)


@dataclass
class SolverConfig:
    """Complete solver configuration."""

    run: RunConfig = field(default_factory=RunConfig)
    criteria: CriteriaConfig = field(default_factory=CriteriaConfig)
    vcmep: VcmepConfig = field(default_factory=VcmepConfig)
    ramsey: RamseyConfigSection = field(default_factory=RamseyConfigSection)
    batch: BatchConfig = field(default_factory=BatchConfig)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class ConfigurationError(Exception):
    """Exception raised when configuration is invalid."""

    pass


_SECTIONS: dict[str, type] = {
    "run": RunConfig,
    "criteria": CriteriaConfig,
    "vcmep": VcmepConfig,
    "ramsey": RamseyConfigSection,
    "batch": BatchConfig,
}


class ConfigManager:
    """Manages loading and validation of solver configuration."""

    DEFAULT_CONFIG_NAMES = [".lopsided-mt.yaml", ".lopsided-mt.yml", ".lopsided-mt.toml"]

    def __init__(self) -> None:
        self.config: SolverConfig | None = None

    def load_config(
        self, config_path: Path | None = None, search_path: Path | None = None
    ) -> SolverConfig:
        """Load configuration from file or create default.

        Args:
            config_path: Explicit path to configuration file
            search_path: Directory to search for a default-named file

        Returns:
            Loaded or default configuration

        Raises:
            ConfigurationError: If configuration is invalid
        """
        if config_path:
            if not config_path.exists():
                raise ConfigurationError(f"Configuration file not found: {config_path}")
            self.config = self._load_config_file(config_path)
        else:
            config_file = self._find_config_file(search_path or Path.cwd())
            if config_file:
                logger.info(f"Found configuration file: {config_file}")
                self.config = self._load_config_file(config_file)
            else:
                logger.debug("No configuration file found, using defaults")
                self.config = self._create_config_from_dict({})

        self._validate_config(self.config)
        return self.config

    def _find_config_file(self, search_path: Path) -> Path | None:
        for config_name in self.DEFAULT_CONFIG_NAMES:
            config_path = search_path / config_name
            if config_path.exists():
                return config_path
        return None

    def _load_config_file(self, config_path: Path) -> SolverConfig:
        """Load configuration from a specific file.

        Raises:
            ConfigurationError: If file cannot be loaded or parsed
        """
        suffix = config_path.suffix.lower()
        if suffix in [".yaml", ".yml"]:
            data = self._read_yaml(config_path)
        elif suffix == ".toml":
            data = self._read_toml(config_path)
        else:
            raise ConfigurationError(f"Unsupported configuration format: {config_path.suffix}")

        if not data:
            logger.warning(f"Empty configuration file: {config_path}")
            data = {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"Configuration in {config_path} must be a mapping")
        return self._create_config_from_dict(data)

    def _read_yaml(self, config_path: Path) -> Any:
        try:
            with open(config_path, encoding="utf-8") as f:
                return yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {config_path}: {e}") from e
        except OSError as e:
            raise ConfigurationError(f"Cannot read {config_path}: {e}") from e

    def _read_toml(self, config_path: Path) -> Any:
        try:
            with open(config_path, "rb") as f:
                return tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Invalid TOML in {config_path}: {e}") from e
        except OSError as e:
            raise ConfigurationError(f"Cannot read {config_path}: {e}") from e

    def _create_config_from_dict(self, data: dict[str, Any]) -> SolverConfig:
        """Create a SolverConfig from file data.

        Raises:
            ConfigurationError: On unknown sections or keys
        """
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigurationError(f"Unknown configuration sections: {sorted(unknown)}")

        sections: dict[str, Any] = {}
        for name, section_type in _SECTIONS.items():
            values = data.get(name) or {}
            if not isinstance(values, dict):
                raise ConfigurationError(f"Section '{name}' must be a mapping")
            try:
                sections[name] = section_type(**self._coerce(name, section_type, values))
            except TypeError as e:
                raise ConfigurationError(f"Invalid keys in section '{name}': {e}") from e

        config = SolverConfig(**sections)
        config.batch.workers = self._get_env_override_int(WORKERS_ENV_VAR, config.batch.workers)
        return config

    def _coerce(self, name: str, section_type: type, values: dict[str, Any]) -> dict[str, Any]:
        """Convert numeric strings and reject values of the wrong type."""
        coerced = dict(values)
        for f in fields(section_type):
            if f.name not in coerced or f.type not in (int, float):
                continue
            value = coerced[f.name]
            if isinstance(value, bool):
                raise ConfigurationError(f"{name}.{f.name} must be a number, got {value!r}")
            try:
                coerced[f.name] = f.type(value)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(
                    f"{name}.{f.name} must be {f.type.__name__}, got {value!r}"
                ) from e
        return coerced

    def _get_env_override_int(self, env_var: str, default_value: int) -> int:
        """Integer configuration value with environment variable override.

        Raises:
            ConfigurationError: If the variable is set but not an integer
        """
        env_value = os.environ.get(env_var)
        if env_value is None or env_value == "":
            return default_value
        try:
            return int(env_value)
        except ValueError as e:
            raise ConfigurationError(f"{env_var} must be an integer, got {env_value!r}") from e

    def _validate_config(self, config: SolverConfig) -> None:
        """Validate configuration values.

        Raises:
            ConfigurationError: If configuration is invalid
        """
        if config.run.seed < 0:
            raise ConfigurationError("run.seed must be nonnegative")
        for name in ("max_steps", "max_rounds", "runs"):
            if getattr(config.run, name) <= 0:
                raise ConfigurationError(f"run.{name} must be positive")
        if config.criteria.epsilon < 0:
            raise ConfigurationError("criteria.epsilon must be nonnegative")
        for name in ("max_iters", "enumeration_cap"):
            if getattr(config.criteria, name) <= 0:
                raise ConfigurationError(f"criteria.{name} must be positive")
        if config.criteria.divergence_cap <= 0 or config.criteria.tolerance < 0:
            raise ConfigurationError("criteria.divergence_cap and tolerance must be positive")
        try:
            VcmepAlgorithm(config.vcmep.algorithm)
        except ValueError as e:
            raise ConfigurationError(
                f"Unknown vcmep.algorithm '{config.vcmep.algorithm}'"
            ) from e
        if config.ramsey.enumeration_cap <= 0 or config.ramsey.samples <= 0:
            raise ConfigurationError("ramsey.enumeration_cap and samples must be positive")
        if config.batch.workers <= 0:
            raise ConfigurationError("batch.workers must be positive")
        logger.debug("Configuration validation complete")

    def create_default_config_file(
        self, directory: Path, config_format: str = "yaml", config: SolverConfig | None = None
    ) -> Path:
        """Write a commented default configuration file.

        When ``config`` is given it is written as plain YAML through
        :meth:`save_config` instead of the template.

        Raises:
            ConfigurationError: If the format is unknown or the file exists
        """
        if config_format not in ["yaml", "toml"]:
            raise ConfigurationError(f"Unsupported config format: {config_format}")
        if config is not None and config_format != "yaml":
            raise ConfigurationError("A loaded configuration can only be written as YAML")
        config_path = directory / f".lopsided-mt.{config_format}"
        if config_path.exists():
            raise ConfigurationError(f"Configuration file already exists: {config_path}")

        if config is not None:
            self.save_config(config, config_path)
            return config_path
        template = _YAML_TEMPLATE if config_format == "yaml" else _TOML_TEMPLATE
        try:
            config_path.write_text(template, encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Failed to create configuration file: {e}") from e
        logger.info(f"Created default configuration file: {config_path}")
        return config_path

    def save_config(self, config: SolverConfig, config_path: Path) -> None:
        """Save configuration to a YAML file.

        Raises:
            ConfigurationError: If configuration cannot be saved
        """
        try:
            with open(config_path, "w", encoding="utf-8") as f:
                yaml.dump(config.to_dict(), f, default_flow_style=False, indent=2)
        except OSError as e:
            raise ConfigurationError(f"Failed to save configuration to {config_path}: {e}") from e
        logger.info(f"Configuration saved to {config_path}")


_YAML_TEMPLATE = f"""run:
  seed: {DEFAULT_SEED}          # root seed of all randomness
  max_steps: {DEFAULT_MAX_STEPS}      # sequential resampling budget
  max_rounds: {DEFAULT_MAX_ROUNDS}      # parallel round budget
  runs: 100               # seeded runs for statistics

criteria:
  epsilon: 0.0            # slack: mu(B) >= (1 + epsilon) rhs(B)
  max_iters: {DEFAULT_MAX_ITERS}
  divergence_cap: 1.0e+9
  enumeration_cap: {DEFAULT_ENUMERATION_CAP}
  tolerance: 1.0e-9

vcmep:
  algorithm: greedy       # greedy or parallel

ramsey:
  enumeration_cap: {DEFAULT_ENUMERATION_CAP}
  samples: 1

# batch:
#   workers: 8            # also LOPSIDED_MT_WORKERS
"""

_TOML_TEMPLATE = f"""[run]
seed = {DEFAULT_SEED}
max_steps = {DEFAULT_MAX_STEPS}
max_rounds = {DEFAULT_MAX_ROUNDS}
runs = 100

[criteria]
epsilon = 0.0
max_iters = {DEFAULT_MAX_ITERS}
divergence_cap = 1.0e9
enumeration_cap = {DEFAULT_ENUMERATION_CAP}
tolerance = 1.0e-9

[vcmep]
algorithm = "greedy"

[ramsey]
enumeration_cap = {DEFAULT_ENUMERATION_CAP}
samples = 1

# [batch]
# workers = 8
"""
