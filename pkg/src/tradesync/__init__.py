"""Pulse-coupled integrate-and-fire oscillators on weighted trade networks."""

__version__ = "0.1.0"
