"""Observation channels: rendered frames (pointing regime) and structured text."""

from squadbench.observation.layout import SCREEN_H, SCREEN_W, Widget, build_widgets
from squadbench.observation.render import FrameObservation, hit_test, png_bytes, render_frame
from squadbench.observation.textify import StructuredObservation, textify

__all__ = [
    "SCREEN_H",
    "SCREEN_W",
    "FrameObservation",
    "StructuredObservation",
    "Widget",
    "build_widgets",
    "hit_test",
    "png_bytes",
    "render_frame",
    "textify",
]
