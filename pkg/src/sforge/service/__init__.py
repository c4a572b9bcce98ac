"""HTTP facade over the scenario engine."""

from .app import create_app

__all__ = ["create_app"]
