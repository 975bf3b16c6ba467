"""Detailed error reporting and suggestion system.

This module turns the exceptions raised while parsing, checking and solving
into structured reports with a category, a severity and actionable
suggestions, and maps each category to a process exit code.
"""

import logging
import traceback
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2


class ErrorSeverity(Enum):
    """Severity levels for errors."""

    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Categories of errors."""

    INPUT_FORMAT = "input_format"
    INSTANCE_VALIDATION = "instance_validation"
    CRITERION = "criterion"
    NON_TERMINATION = "non_termination"
    ENUMERATION = "enumeration"
    CONFIGURATION = "configuration"
    FILE_SYSTEM = "file_system"
    VALIDATION = "validation"


# criterion failures and non-termination are results, everything else is bad input
_EXIT_CODES = {
    ErrorCategory.CRITERION: EXIT_FAILURE,
    ErrorCategory.NON_TERMINATION: EXIT_FAILURE,
}


@dataclass
class ErrorSuggestion:
    """A suggested remedy for an error."""

    title: str
    description: str
    action_type: str  # "fix", "workaround", "investigate", "configure"
    command: str | None = None
    priority: int = 1  # 1=high, 2=medium, 3=low


@dataclass
class DetailedError:
    """Error information with suggestions."""

    error_id: str
    title: str
    description: str
    severity: ErrorSeverity
    category: ErrorCategory
    original_exception: Exception | None = None
    context: dict[str, Any] = field(default_factory=dict)
    suggestions: list[ErrorSuggestion] = field(default_factory=list)
    affected_files: list[Path] = field(default_factory=list)
    stack_trace: str | None = None

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES.get(self.category, EXIT_INPUT_ERROR)

    def add_suggestion(self, suggestion: ErrorSuggestion) -> None:
        self.suggestions.append(suggestion)
        self.suggestions.sort(key=lambda s: s.priority)

    def to_dict(self) -> dict[str, Any]:
        """Convert error to dictionary representation."""
        return {
            "error_id": self.error_id,
            "title": self.title,
            "description": self.description,
            "severity": self.severity.value,
            "category": self.category.value,
            "context": self.context.copy(),
            "suggestions": [
                {
                    "title": s.title,
                    "description": s.description,
                    "action_type": s.action_type,
                    "command": s.command,
                    "priority": s.priority,
                }
                for s in self.suggestions
            ],
            "affected_files": [str(f).replace("\\", "/") for f in self.affected_files],
            "has_stack_trace": self.stack_trace is not None,
        }


@dataclass
class _Pattern:
    error_id: str
    title: str
    category: ErrorCategory
    severity: ErrorSeverity = ErrorSeverity.ERROR


class ErrorReporter:
    """Error reporting and suggestion system."""

    def __init__(self) -> None:
        self.error_patterns: dict[str, _Pattern] = {}
        self.suggestion_handlers: dict[
            ErrorCategory, list[Callable[[DetailedError], list[ErrorSuggestion]]]
        ] = {}

        self._register_builtin_patterns()
        self._register_builtin_suggestions()

    def report_error(
        self,
        exception: Exception,
        context: dict[str, Any] | None = None,
        category: ErrorCategory | None = None,
        affected_files: list[Path] | None = None,
    ) -> DetailedError:
        """Report an error with its analysis and suggestions.

        Args:
            exception: The original exception
            context: Additional context information
            category: Error category (auto-detected if None)
            affected_files: Files involved in the error

        Returns:
            DetailedError object with suggestions
        """
        context = dict(context or {})
        detailed_error = self._match_error_pattern(exception, context)
        if detailed_error is None:
            detailed_error = self._create_generic_error(exception, context, category)
        elif category is not None:
            detailed_error.category = category

        line_number = getattr(exception, "line_number", None)
        if line_number is not None:
            detailed_error.context.setdefault("line", line_number)
        if exception.__traceback__ is not None:
            detailed_error.stack_trace = "".join(traceback.format_exception(exception))
        detailed_error.affected_files.extend(affected_files or [])

        self._generate_suggestions(detailed_error)

        logger.debug(f"Error reported: {detailed_error.title} ({detailed_error.error_id})")
        return detailed_error

    def _match_error_pattern(
        self, exception: Exception, context: dict[str, Any]
    ) -> DetailedError | None:
        """Match the exception type, or its nearest known base class."""
        for cls in type(exception).__mro__:
            pattern = self.error_patterns.get(cls.__name__)
            if pattern is not None:
                return DetailedError(
                    error_id=pattern.error_id,
                    title=pattern.title,
                    description=str(exception),
                    severity=pattern.severity,
                    category=pattern.category,
                    original_exception=exception,
                    context=context,
                )
        return None

    def _create_generic_error(
        self,
        exception: Exception,
        context: dict[str, Any],
        category: ErrorCategory | None,
    ) -> DetailedError:
        error_id = f"generic_{type(exception).__name__}_{hash(str(exception)) % 10000:04d}"
        return DetailedError(
            error_id=error_id,
            title=f"{type(exception).__name__}: {str(exception)[:100]}",
            description=str(exception),
            severity=ErrorSeverity.ERROR,
            category=category or ErrorCategory.VALIDATION,
            original_exception=exception,
            context=context,
        )

    def _generate_suggestions(self, error: DetailedError) -> None:
        for handler in self.suggestion_handlers.get(error.category, []):
            try:
                for suggestion in handler(error):
                    error.add_suggestion(suggestion)
            except Exception as e:
                logger.warning(f"Suggestion handler failed: {e}")

    def _register_builtin_patterns(self) -> None:
        """Register the exception types raised by the solver."""
        patterns = [
            _Pattern("input_format", "Malformed Input", ErrorCategory.INPUT_FORMAT),
            _Pattern("invalid_instance", "Invalid Instance", ErrorCategory.INSTANCE_VALIDATION),
            _Pattern("invalid_hypergraph", "Invalid Hypergraph", ErrorCategory.INSTANCE_VALIDATION),
            _Pattern(
                "application_input", "Invalid Application Input", ErrorCategory.INSTANCE_VALIDATION
            ),
            _Pattern("mu_not_found", "No Weights Found", ErrorCategory.CRITERION),
            _Pattern("non_termination", "Run Did Not Terminate", ErrorCategory.NON_TERMINATION),
            _Pattern("enumeration_cap", "Enumeration Cap Exceeded", ErrorCategory.ENUMERATION),
            _Pattern("configuration", "Invalid Configuration", ErrorCategory.CONFIGURATION),
            _Pattern("invalid_option", "Invalid Option", ErrorCategory.CONFIGURATION),
            _Pattern("file_not_found", "File Not Found", ErrorCategory.FILE_SYSTEM),
            _Pattern("permission_denied", "Permission Denied", ErrorCategory.FILE_SYSTEM),
        ]
        by_id = {p.error_id: p for p in patterns}
        type_names = {
            "InputFormatError": "input_format",
            "InstanceError": "invalid_instance",
            "HypergraphError": "invalid_hypergraph",
            "ApplicationInputError": "application_input",
            "MuNotFoundError": "mu_not_found",
            "NonTerminationError": "non_termination",
            "ParallelNonTerminationError": "non_termination",
            "PackingNonTerminationError": "non_termination",
            "EnumerationCapError": "enumeration_cap",
            "ConfigurationError": "configuration",
            "CliOptionError": "invalid_option",
            "FileNotFoundError": "file_not_found",
            "IsADirectoryError": "file_not_found",
            "PermissionError": "permission_denied",
        }
        for type_name, error_id in type_names.items():
            self.error_patterns[type_name] = by_id[error_id]

    def _register_builtin_suggestions(self) -> None:
        self.suggestion_handlers[ErrorCategory.INPUT_FORMAT] = [self._suggest_input_fixes]
        self.suggestion_handlers[ErrorCategory.INSTANCE_VALIDATION] = [
            self._suggest_instance_fixes
        ]
        self.suggestion_handlers[ErrorCategory.CRITERION] = [self._suggest_criterion_fixes]
        self.suggestion_handlers[ErrorCategory.NON_TERMINATION] = [
            self._suggest_non_termination_fixes
        ]
        self.suggestion_handlers[ErrorCategory.ENUMERATION] = [self._suggest_enumeration_fixes]
        self.suggestion_handlers[ErrorCategory.CONFIGURATION] = [self._suggest_config_fixes]
        self.suggestion_handlers[ErrorCategory.FILE_SYSTEM] = [self._suggest_file_system_fixes]

    def _suggest_input_fixes(self, error: DetailedError) -> list[ErrorSuggestion]:
        line = error.context.get("line")
        where = f"line {line}" if line else "the reported line"
        return [
            ErrorSuggestion(
                title="Fix the input line",
                description=f"Correct {where} so it follows the documented text format",
                action_type="fix",
            )
        ]

    def _suggest_instance_fixes(self, _: DetailedError) -> list[ErrorSuggestion]:
        return [
            ErrorSuggestion(
                title="Check events and domains",
                description="Every event must demand each variable at most once, with values "
                "inside its domain; probabilities of each variable must sum to 1",
                action_type="fix",
            )
        ]

    def _suggest_criterion_fixes(self, _: DetailedError) -> list[ErrorSuggestion]:
        return [
            ErrorSuggestion(
                title="Try a weaker criterion",
                description="Exact orderable or assignable criteria accept more instances "
                "than the closed forms",
                action_type="workaround",
                command="lopsided-mt check INSTANCE --criterion orderable",
            ),
            ErrorSuggestion(
                title="Lower the slack",
                description="A smaller epsilon makes the criterion easier to satisfy",
                action_type="configure",
                priority=2,
            ),
        ]

    def _suggest_non_termination_fixes(self, _: DetailedError) -> list[ErrorSuggestion]:
        return [
            ErrorSuggestion(
                title="Raise the step or round budget",
                description="Increase run.max_steps or run.max_rounds, or pass --max-steps",
                action_type="configure",
            ),
            ErrorSuggestion(
                title="Check the criterion first",
                description="If no criterion holds, the run is not expected to terminate quickly",
                action_type="investigate",
                command="lopsided-mt check INSTANCE",
                priority=2,
            ),
        ]

    def _suggest_enumeration_fixes(self, _: DetailedError) -> list[ErrorSuggestion]:
        return [
            ErrorSuggestion(
                title="Use a closed-form criterion",
                description="Blend and Pegden criteria need no subset enumeration",
                action_type="workaround",
                command="lopsided-mt check INSTANCE --criterion blend",
            ),
            ErrorSuggestion(
                title="Raise the enumeration cap",
                description="Increase criteria.enumeration_cap in the configuration file",
                action_type="configure",
                priority=2,
            ),
        ]

    def _suggest_config_fixes(self, error: DetailedError) -> list[ErrorSuggestion]:
        if error.error_id == "invalid_option":
            return [
                ErrorSuggestion(
                    title="Check the flag value",
                    description="Run the subcommand with --help to see accepted values",
                    action_type="fix",
                )
            ]
        return [
            ErrorSuggestion(
                title="Recreate the configuration file",
                description="Compare against a freshly written default configuration",
                action_type="fix",
                command="lopsided-mt init-config",
            )
        ]

    def _suggest_file_system_fixes(self, error: DetailedError) -> list[ErrorSuggestion]:
        suggestions = [
            ErrorSuggestion(
                title="Check the path",
                description="Make sure the file exists and is readable",
                action_type="investigate",
            )
        ]
        if error.error_id == "permission_denied":
            suggestions.append(
                ErrorSuggestion(
                    title="Fix permissions",
                    description="Grant read access to the input and write access to --output",
                    action_type="fix",
                )
            )
        return suggestions


_global_reporter: ErrorReporter | None = None


def get_global_reporter() -> ErrorReporter:
    """Get or create the global error reporter."""
    global _global_reporter
    if _global_reporter is None:
        _global_reporter = ErrorReporter()
    return _global_reporter


def report_error(
    exception: Exception,
    context: dict[str, Any] | None = None,
    category: ErrorCategory | None = None,
    affected_files: list[Path] | None = None,
) -> DetailedError:
    """Report an error using the global reporter."""
    return get_global_reporter().report_error(exception, context, category, affected_files)


def create_error_context(operation: str, **kwargs: Any) -> dict[str, Any]:
    """Create an error context dictionary with standard fields."""
    context: dict[str, Any] = {"operation": operation}
    context.update(kwargs)
    return context
