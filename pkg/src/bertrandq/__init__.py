"""Deterministic simulator of repeated Bertrand price competition among
tabular Q-learning agents under configurable information structures."""

__version__ = "0.1.0"
