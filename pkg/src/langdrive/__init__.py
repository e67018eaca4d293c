"""Desk-scale language-conditioned driving: simulator, data pipeline, models, executor."""

__version__ = "0.1.0"
