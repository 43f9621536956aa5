"""Simulation and verification toolkit for oscillator-based period finding."""

__version__ = "0.1.0"
