"""Supplier selection: AHP ranking, annealed order allocation, Taguchi tuning."""

__version__ = "0.1.0"
