"""Rectangular strips of a stiffened panel and their 10 x 50 sampling stations.

Every panel is split into plate bays, webs and flanges.  Each strip carries a
grid of stations in the panel frame (x along the stiffeners, y across the
panel, z along the outward normal).  Rows run transverse to the stiffeners,
columns along them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cross_section import PanelSection

GRID_ROWS = 10
GRID_COLS = 50
GRID_SIZE = GRID_ROWS * GRID_COLS

BAY, WEB, FLANGE = "bay", "web", "flange"
STRIP_KINDS = (BAY, WEB, FLANGE)


@dataclass(frozen=True)
class Strip:
    kind: str
    index: int  # bay number, or stiffener number for webs and flanges
    # transverse extent: a segment from p0 to p1 in the (y, z) plane
    p0: tuple
    p1: tuple
    thickness: float

    @property
    def name(self) -> str:
        return f"{self.kind}{self.index}"

    @property
    def width(self) -> float:
        return float(np.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]))

    @property
    def parallel_to_plate(self) -> bool:
        return self.p0[1] == self.p1[1]


def panel_strips(section: PanelSection) -> list[Strip]:
    """Canonical strip order: bays left to right, then webs, then flanges."""
    t = section.plate_thickness
    ys = np.concatenate([[0.0], section.stiffener_positions(), [section.width]])
    strips = [Strip(BAY, i, (ys[i], 0.0), (ys[i + 1], 0.0), t) for i in range(len(ys) - 1)]
    zf = section.flange_z
    half = 0.5 * section.flange_width
    for k, y in enumerate(section.stiffener_positions()):
        strips.append(Strip(WEB, k, (y, 0.0), (y, zf), section.web_thickness))
    for k, y in enumerate(section.stiffener_positions()):
        strips.append(Strip(FLANGE, k, (y - half, zf), (y + half, zf), section.flange_thickness))
    return strips


def strip_stations(strip: Strip, span: float, rows: int = GRID_ROWS, cols: int = GRID_COLS):
    """Station coordinates (x, y, z), each shaped (rows, cols)."""
    r = np.linspace(0.0, 1.0, rows)
    x = np.linspace(0.0, span, cols)
    y = strip.p0[0] + r * (strip.p1[0] - strip.p0[0])
    z = strip.p0[1] + r * (strip.p1[1] - strip.p0[1])
    X = np.broadcast_to(x[None, :], (rows, cols))
    Y = np.broadcast_to(y[:, None], (rows, cols))
    Z = np.broadcast_to(z[:, None], (rows, cols))
    return X, Y, Z


@dataclass
class FieldGrid:
    """One scalar field sampled on a strip's 10 x 50 station grid."""
    values: np.ndarray
    strip: str
    field: str = "vm"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (GRID_ROWS, GRID_COLS):
            raise ValueError(f"field grid must be {GRID_ROWS}x{GRID_COLS}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite values in field grid {self.strip}")
