"""Deterministic claim-chart analysis over a discretized score lattice."""

__version__ = "0.1.0"
