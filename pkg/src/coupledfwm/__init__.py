"""Coupling-induced four-wave mixing in pairs of waveguides."""

__version__ = "0.1.0"
