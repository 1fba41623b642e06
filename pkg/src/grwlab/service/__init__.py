"""HTTP service wrapping the core package; run with uvicorn or `grwlab serve`."""

from .app import app

__all__ = ["app"]
