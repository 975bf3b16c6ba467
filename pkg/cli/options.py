"""Validated per-invocation options.

Flags given on the command line override the values of the loaded
configuration file; the merged values are validated once by ``CliConfig``.
"""

import logging
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config.solver_config import SolverConfig
from mt_engine.criteria import CriterionKind
from mt_engine.parallel import VcmepAlgorithm

logger = logging.getLogger(__name__)


class CliOptionError(Exception):
    """Exception raised when a command-line value fails validation."""

    def __init__(self, field_name: str, message: str) -> None:
        self.field_name = field_name
        super().__init__(f"Invalid value for '{field_name}': {message}")


class CliConfig(BaseModel):
    """Options shared by all subcommands after merging flags with the configuration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    subcommand: str
    input_path: Path | None = None
    seed: int = Field(ge=0)
    criterion: CriterionKind = CriterionKind.BLEND_CLOSED_FORM
    epsilon: float = Field(ge=0.0, allow_inf_nan=False)
    runs: int = Field(ge=1)
    max_steps: int = Field(ge=1)
    max_rounds: int = Field(ge=1)
    max_iters: int = Field(ge=1)
    divergence_cap: float = Field(gt=0.0)
    enumeration_cap: int = Field(ge=1)
    tolerance: float = Field(ge=0.0, allow_inf_nan=False)
    algorithm: VcmepAlgorithm = VcmepAlgorithm.GREEDY
    workers: int = Field(ge=1)
    output: Path | None = None

    @field_validator("input_path")
    @classmethod
    def _input_exists(cls, value: Path | None) -> Path | None:
        if value is not None and not value.is_file():
            raise ValueError(f"input file does not exist: {value}")
        return value

    @classmethod
    def resolve(cls, subcommand: str, config: SolverConfig, **flags: Any) -> "CliConfig":
        """Merge flags over configuration values and validate the result.

        Flags passed as ``None`` fall back to the configuration.

        Raises:
            CliOptionError: Naming the first field that fails validation
        """
        values: dict[str, Any] = {
            "seed": config.run.seed,
            "epsilon": config.criteria.epsilon,
            "runs": config.run.runs,
            "max_steps": config.run.max_steps,
            "max_rounds": config.run.max_rounds,
            "max_iters": config.criteria.max_iters,
            "divergence_cap": config.criteria.divergence_cap,
            "enumeration_cap": config.criteria.enumeration_cap,
            "tolerance": config.criteria.tolerance,
            "algorithm": config.vcmep.algorithm,
            "workers": config.batch.workers,
        }
        values.update({key: value for key, value in flags.items() if value is not None})
        values["subcommand"] = subcommand
        try:
            options = cls.model_validate(values)
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first["loc"]) or "options"
            raise CliOptionError(location, first["msg"]) from e
        logger.debug(f"Resolved options for {subcommand}: {options.model_dump(mode='json')}")
        return options
