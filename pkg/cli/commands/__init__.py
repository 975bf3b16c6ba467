"""Subcommand implementations.

Each tool function takes the resolved ``CliConfig`` and returns a JSON-ready
dict whose ``status`` is ``ok`` or ``unsatisfied``; failures propagate as
exceptions and are turned into exit codes by ``cli.main``.
"""

STATUS_OK = "ok"
STATUS_UNSATISFIED = "unsatisfied"
