"""Bundled guidance corpus for the hint oracle."""
