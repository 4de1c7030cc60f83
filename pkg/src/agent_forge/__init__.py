"""Synthetic GUI-agent data: exploration, environment memory, task synthesis and rollout."""

__version__ = "0.1.0"
