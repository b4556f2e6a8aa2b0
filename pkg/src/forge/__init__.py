"""Hermetic CI/CD pipeline engine with pipeline-as-code definitions."""

from forge.dsl import parse_pipeline, plan, validate
from forge.executor import promote_run, run_pipeline
from forge.store import Store

__version__ = "0.1.0"

__all__ = [
    "Store",
    "parse_pipeline",
    "plan",
    "promote_run",
    "run_pipeline",
    "validate",
    "__version__",
]
