"""Discrete-event simulator of multi-hop THz networks in an industrial plant."""

__version__ = "0.1.0"
