"""Detailed boundary kinematics of a stiffened panel from the homogenized solution.

Web and flange edge points take the DOFs of the plate mid-plane point A they
sit under, except the axial displacement, which follows the rule that the
stiffener cross-section stays perpendicular to the plate at the bulkhead:
u_B = u_A + z_B * theta_Ay, with z_B the signed distance from the plate
mid-plane (negative on the stiffener side).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cross_section import PanelSection

EDGE_STATIONS = 60
DOFS = ("u", "v", "w", "theta_x", "theta_y", "theta_z")
BOUNDARY_FEATURES = EDGE_STATIONS * len(DOFS)


@dataclass
class EdgeKinematics:
    """Panel-frame DOFs on the four plate edges of one panel.

    ``values[edge]`` is (60, 6); ``stations[edge]`` the increasing edge
    coordinate of each station.  Edges x0/x1 run along y, y0/y1 along x.
    """
    values: dict
    stations: dict
    location: dict
    panel_id: str = ""

    def __post_init__(self):
        for name, v in self.values.items():
            v = np.asarray(v, dtype=float)
            s = np.asarray(self.stations[name], dtype=float)
            if v.shape != (EDGE_STATIONS, 6) or s.shape != (EDGE_STATIONS,):
                raise ValueError(f"edge {name}: expected {EDGE_STATIONS} stations x 6 DOFs")
            ds = np.diff(s)
            if np.any(ds <= 0) or not np.allclose(ds, ds[0], rtol=1e-9):
                raise ValueError(f"edge {name}: stations must be uniform and increasing")
            self.values[name] = v
            self.stations[name] = s

    def scaled(self, alpha):
        return EdgeKinematics({k: alpha * v for k, v in self.values.items()},
                              dict(self.stations), dict(self.location), self.panel_id)

    @classmethod
    def clamped(cls, span, width):
        st = {"x0": np.linspace(0, width, EDGE_STATIONS), "x1": np.linspace(0, width, EDGE_STATIONS),
              "y0": np.linspace(0, span, EDGE_STATIONS), "y1": np.linspace(0, span, EDGE_STATIONS)}
        return cls({k: np.zeros((EDGE_STATIONS, 6)) for k in st}, st, {k: "clamped" for k in st})


@dataclass
class BoundaryRecord:
    values: np.ndarray   # (60, 6) panel-frame DOFs
    points: np.ndarray   # (60, 3) panel-frame station coordinates


@dataclass
class PanelBoundary:
    """Prescribed kinematics on every member edge of a panel.

    Record names: plate_x0, plate_x1, plate_y0, plate_y1, web{k}_x0, web{k}_x1,
    flange{k}_x0, flange{k}_x1.
    """
    records: dict

    def names(self):
        return list(self.records)

    def features(self, name):
        """Station-major, DOF-minor 360-vector of one record."""
        return self.records[name].values.reshape(-1)

    def scaled(self, alpha):
        return PanelBoundary({k: BoundaryRecord(alpha * r.values, r.points)
                              for k, r in self.records.items()})


def _interp_rows(s_query, s, values):
    return np.column_stack([np.interp(s_query, s, values[:, k]) for k in range(values.shape[1])])


def _adjust(a_values, z):
    out = a_values.copy()
    out[:, 0] = a_values[:, 0] + z * a_values[:, 4]
    return out


def recover_boundary(edges: EdgeKinematics, section: PanelSection) -> PanelBoundary:
    L, B = section.span, section.width
    n = EDGE_STATIONS
    rec = {}
    for name in ("x0", "x1", "y0", "y1"):
        s = edges.stations[name]
        if not (np.isclose(s[-1], B if name[0] == "x" else L, rtol=1e-9)):
            raise ValueError(f"edge {name} length does not match the section")
        pts = np.zeros((n, 3))
        if name[0] == "x":
            pts[:, 0] = 0.0 if name == "x0" else L
            pts[:, 1] = s
        else:
            pts[:, 0] = s
            pts[:, 1] = 0.0 if name == "y0" else B
        rec[f"plate_{name}"] = BoundaryRecord(edges.values[name].copy(), pts)
    if section.is_bare:
        return PanelBoundary(rec)
    zf = section.flange_z
    half = 0.5 * section.flange_width
    for end in ("x0", "x1"):
        x = 0.0 if end == "x0" else L
        s, vals = edges.stations[end], edges.values[end]
        for k, yk in enumerate(section.stiffener_positions()):
            z = np.linspace(0.0, zf, n)
            a = np.repeat(_interp_rows([yk], s, vals), n, axis=0)
            rec[f"web{k}_{end}"] = BoundaryRecord(
                _adjust(a, z), np.column_stack([np.full(n, x), np.full(n, yk), z]))
        for k, yk in enumerate(section.stiffener_positions()):
            y = np.linspace(yk - half, yk + half, n)
            a = _interp_rows(y, s, vals)
            rec[f"flange{k}_{end}"] = BoundaryRecord(
                _adjust(a, np.full(n, zf)), np.column_stack([np.full(n, x), y, np.full(n, zf)]))
    return PanelBoundary(rec)
