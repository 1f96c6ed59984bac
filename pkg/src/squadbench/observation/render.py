"""Deterministic frame renderer: a flat-color schematic of the battle UI.

The raster is a pure function of the battle state, so identical states
produce identical bytes.  Bars, pips and glyph boxes stand in for game
art; what matters for the pointing regime is that every affordance has a
stable on-screen location and a visually distinct enabled state.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from squadbench.engine.types import BattleState, Side
from squadbench.observation.layout import SCREEN_H, SCREEN_W, Widget, build_widgets

BACKGROUND = (18, 18, 26)
PANEL = (44, 46, 58)
PANEL_DIM = (30, 31, 38)
BORDER = (96, 100, 116)
BORDER_BROKEN = (220, 70, 70)
HP_ENEMY = (204, 58, 58)
HP_ALLY = (86, 190, 96)
BAR_BACK = (58, 58, 66)
TOUGHNESS = (235, 235, 235)
ENERGY = (80, 200, 230)
ENERGY_FULL = (255, 214, 90)
PIP_ON = (255, 214, 90)
PIP_OFF = (70, 70, 78)
GLOW = (255, 230, 120)
ACTIVE = (255, 214, 90)
OFFER_MARK = (255, 255, 255)

ELEMENT_COLORS = {
    "physical": (154, 154, 154),
    "fire": (224, 87, 43),
    "ice": (110, 195, 232),
    "lightning": (176, 92, 230),
    "wind": (99, 214, 160),
    "quantum": (79, 95, 214),
    "imaginary": (232, 210, 90),
}


@dataclass
class FrameObservation:
    image: np.ndarray  # (1080, 1920, 3) uint8
    layout: list[Widget]
    frame_id: int


def _fill(img: np.ndarray, rect: tuple[int, int, int, int], color) -> None:
    x, y, w, h = rect
    img[y : y + h, x : x + w] = color


def _border(img: np.ndarray, rect: tuple[int, int, int, int], color, t: int = 2) -> None:
    x, y, w, h = rect
    img[y : y + t, x : x + w] = color
    img[y + h - t : y + h, x : x + w] = color
    img[y : y + h, x : x + t] = color
    img[y : y + h, x + w - t : x + w] = color


def _bar(img, x, y, w, h, frac, fill_color) -> None:
    _fill(img, (x, y, w, h), BAR_BACK)
    filled = int(round(max(0.0, min(1.0, frac)) * w))
    if filled > 0:
        _fill(img, (x, y, filled, h), fill_color)


def render_frame(state: BattleState) -> FrameObservation:
    """Render the current state to a 1920x1080 frame plus its widget map."""
    img = np.empty((SCREEN_H, SCREEN_W, 3), dtype=np.uint8)
    img[:, :] = BACKGROUND
    widgets = build_widgets(state)

    for widget in widgets:
        x, y, w, h = widget.rect
        if widget.kind == "order_track_slot":
            actor = state.find(widget.bound_id)
            _fill(img, widget.rect, PANEL)
            tint = HP_ALLY if actor.side is Side.ALLY else HP_ENEMY
            _border(img, widget.rect, tint)
            _fill(img, (x + 8, y + 8, 18, 18), ELEMENT_COLORS[actor.element])
        elif widget.kind == "target_frame":
            enemy = state.find(widget.bound_id)
            _fill(img, widget.rect, PANEL)
            if widget.bound_id == state.current_actor:
                _border(img, widget.rect, ACTIVE, t=4)
            else:
                _border(img, widget.rect, BORDER_BROKEN if enemy.broken else BORDER)
            if enemy.toughness_max > 0:
                _bar(img, x + 10, y + 56, w - 20, 10,
                     enemy.toughness / enemy.toughness_max, TOUGHNESS)
            _bar(img, x + 10, y + 72, w - 20, 16, enemy.hp / enemy.max_hp, HP_ENEMY)
            for i, element in enumerate(sorted(enemy.weaknesses)):
                _fill(img, (x + 10 + i * 26, y + 10, 20, 20), ELEMENT_COLORS[element])
        elif widget.kind == "ally_frame":
            ally = state.find(widget.bound_id)
            _fill(img, widget.rect, PANEL)
            _border(img, widget.rect, ACTIVE if widget.bound_id == state.current_actor else BORDER,
                    t=4 if widget.bound_id == state.current_actor else 2)
            _fill(img, (x + 10, y + 10, 22, 22), ELEMENT_COLORS[ally.element])
            _bar(img, x + 10, y + 120, w - 20, 16, ally.hp / ally.max_hp, HP_ALLY)
            energy_color = ENERGY_FULL if ally.energy >= ally.energy_max else ENERGY
            _bar(img, x + 10, y + 144, w - 20, 10,
                 ally.energy / ally.energy_max, energy_color)
        elif widget.kind == "ult_icon":
            ally = state.find(widget.bound_id)
            _fill(img, widget.rect, PANEL if widget.enabled else PANEL_DIM)
            _border(img, widget.rect, GLOW if widget.enabled else BORDER, t=4)
            offered = state.pending_interrupts and state.pending_interrupts[0] == widget.bound_id
            _fill(
                img,
                (x + 20, y + 20, w - 40, h - 40),
                OFFER_MARK if offered else ELEMENT_COLORS[ally.element],
            )
        elif widget.kind == "sp_pip":
            _fill(img, widget.rect, PIP_ON if widget.enabled else PIP_OFF)
        elif widget.kind == "basic_button":
            _fill(img, widget.rect, PANEL)
            _border(img, widget.rect, BORDER)
            _fill(img, (x + 30, y + 30, w - 60, h - 60), (200, 200, 210))
        elif widget.kind == "skill_button":
            _fill(img, widget.rect, PANEL if widget.enabled else PANEL_DIM)
            _border(img, widget.rect, BORDER if widget.enabled else PANEL_DIM)
            inner = (120, 170, 240) if widget.enabled else (70, 80, 100)
            _fill(img, (x + 30, y + 30, w - 60, h - 60), inner)
        elif widget.kind == "auto_toggle":
            _fill(img, widget.rect, PANEL_DIM)
            _border(img, widget.rect, BORDER)

    return FrameObservation(image=img, layout=widgets, frame_id=state.step_count)


def hit_test(frame: FrameObservation, x: int, y: int) -> Widget | None:
    """Topmost widget containing the (clipped) point, disabled ones included."""
    for widget in reversed(frame.layout):
        if widget.contains(x, y):
            return widget
    return None


def png_bytes(image: np.ndarray) -> bytes:
    """Encode an (H, W, 3) uint8 array as a PNG (RGB8, no interlace)."""
    h, w, _ = image.shape

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (
            struct.pack(">I", len(data))
            + tag
            + data
            + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
        )

    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    raw = b"".join(b"\x00" + image[row].tobytes() for row in range(h))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 6))
        + chunk(b"IEND", b"")
    )
