"""Deterministic turn-based squad-combat simulator and agent evaluation harness."""

__version__ = "0.1.0"
