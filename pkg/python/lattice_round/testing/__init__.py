"""Self-verification suite: named checks and the runner that sweeps them."""
from .assertions import CheckResult
from .runner import Summary, run_all, summarize

__all__ = ["CheckResult", "Summary", "run_all", "summarize"]
