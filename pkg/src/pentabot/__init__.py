"""Desk-scale magnetic levitation: simulator, stability analysis, and
deep-RL control toolkit."""

__version__ = "0.1.0"

__all__ = [
    "magnetics",
    "scene",
    "simulator",
    "stability",
    "environment",
    "nets",
    "ppo",
    "sac",
    "checkpoint",
    "training",
    "scaling",
    "server",
    "config",
    "cli",
]
