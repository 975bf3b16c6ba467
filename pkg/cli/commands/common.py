"""Helpers shared by the subcommands."""

import logging
from pathlib import Path

from cli.options import CliConfig, CliOptionError
from mt_engine.criteria import Criterion, CriterionKind, MuVector, find_mu_fixed_point
from mt_engine.instance_format import load_instance
from mt_engine.model import Instance, InstanceValidationError, validate

logger = logging.getLogger(__name__)


def require_input(options: CliConfig) -> Path:
    if options.input_path is None:
        raise CliOptionError("input_path", f"'{options.subcommand}' needs an input file")
    return options.input_path


def load_checked_instance(path: Path) -> Instance:
    """Load an instance and raise with the full validation report if it is invalid."""
    instance = load_instance(path, strict=False)
    report = validate(instance)
    if not report.ok:
        raise InstanceValidationError(report)
    return instance


def criterion_from(options: CliConfig) -> Criterion:
    return Criterion(
        kind=options.criterion,
        epsilon=options.epsilon,
        enumeration_cap=options.enumeration_cap,
    )


def search_weights(instance: Instance, options: CliConfig) -> MuVector:
    """Least weights for the selected criterion; the symmetric kind falls back to the blend form.

    Raises:
        MuNotFoundError: If the search diverges or runs out of iterations
    """
    criterion = criterion_from(options)
    if criterion.kind is CriterionKind.SYMMETRIC_LLL:
        criterion = Criterion(
            kind=CriterionKind.BLEND_CLOSED_FORM,
            epsilon=options.epsilon,
            enumeration_cap=options.enumeration_cap,
        )
    return find_mu_fixed_point(
        instance, criterion, max_iters=options.max_iters, cap=options.divergence_cap
    )
