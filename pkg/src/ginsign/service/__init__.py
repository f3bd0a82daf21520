"""HTTP service and shared request handlers for the toolkit."""

from .app import create_app

__all__ = ["create_app"]
