"""Simulation, learning and evaluation tools for a soft scrubbing arm."""

__version__ = "0.1.0"
