"""Coarse ESL shell model of a box-beam hull girder.

Walls are homogenized stiffened panels, bulkheads are isotropic plates.  The
global frame has X along the girder, Y across it and Z upwards.  Every wall
segment between two bulkheads is one panel with its own frame: e1 = +X (the
stiffener direction), e3 = the wall normal pointing away from the stiffeners,
e2 = e3 x e1.  Panel-local coordinates (x, y) start at the panel corner with
the smallest e2 coordinate.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .cross_section import (
    STEEL, AbdStiffness, Material, PanelSection, ResultantState, SectionError,
    abd_from_section, isotropic_stiffness,
)
from .shell import ShellModel, Solution, solve_linear

SCHEMA_VERSION = 1
GRAVITY = 9.81
EDGE_STATIONS = 60
EDGE_NAMES = ("x0", "x1", "y0", "y1")

SINGLE_CELL, DOUBLE_BOTTOM, TRIPLE_CELL = "single_cell", "double_bottom", "triple_cell"
CASE_KINDS = (SINGLE_CELL, DOUBLE_BOTTOM, TRIPLE_CELL)
PANEL, BULKHEAD = "homogenized_panel", "isotropic_bulkhead"

# wall kinds without their own section fall back to these
_SECTION_FALLBACK = {"inner_bottom": "bottom", "inner_side": "side", "db_side": "side"}


class MeshError(ValueError):
    pass


def _default_sections():
    top = PanelSection(0.012, 0.008, 0.150, 0.010, 0.080, 4, 2.0, 2.0)
    return {"top": top, "bottom": top, "side": replace(top, stiffener_count=3, width=1.5)}


@dataclass
class BoxBeamConfig:
    """Box-beam geometry.  ``sections`` maps a wall kind to its PanelSection
    template; span and width are replaced by the actual panel dimensions."""
    case_kind: str = SINGLE_CELL
    length: float = 6.0
    width: float = 2.0
    height: float = 1.5
    double_width: float = 2.0          # side-tank width, triple_cell only
    double_bottom_height: float = 0.4  # double_bottom only
    sections: dict = field(default_factory=_default_sections)
    bulkhead_thickness: float = 0.060
    bulkhead_count: int = 4
    material: Material = STEEL
    supports: str = "simply_supported"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.case_kind not in CASE_KINDS:
            raise ValueError(f"unknown case kind {self.case_kind!r}")
        if min(self.length, self.width, self.height, self.bulkhead_thickness) <= 0:
            raise ValueError("box dimensions and bulkhead thickness must be positive")
        if self.bulkhead_count < 2:
            raise ValueError("need at least the two end bulkheads")
        if self.case_kind == TRIPLE_CELL:
            if not 1.5 <= self.double_width <= 2.5:
                raise ValueError("double-structure width must lie in [1.5, 2.5] m")
            if 2 * self.double_width >= self.width:
                raise ValueError("side tanks wider than the box")
        if self.case_kind == DOUBLE_BOTTOM and not 0 < self.double_bottom_height < self.height:
            raise ValueError("double-bottom height must lie inside the box")
        for key in ("top", "bottom", "side"):
            if key not in self.sections:
                raise ValueError(f"missing section for wall kind {key!r}")

    @property
    def bays(self) -> int:
        return self.bulkhead_count - 1

    @property
    def bay_length(self) -> float:
        return self.length / self.bays

    def section_template(self, kind) -> PanelSection:
        return self.sections.get(kind) or self.sections[_SECTION_FALLBACK[kind]]

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if k not in ("sections", "material")}
        d["sections"] = {k: s.to_dict() for k, s in self.sections.items()}
        d["material"] = asdict(self.material)
        d["schema_version"] = SCHEMA_VERSION
        d["support_dofs"] = SUPPORT_DESCRIPTION[self.supports]
        return d

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"box-beam schema version {d.get('schema_version')} != {SCHEMA_VERSION}")
        kw = {k: v for k, v in d.items() if k not in ("schema_version", "support_dofs")}
        kw["sections"] = {k: PanelSection.from_dict(s) for k, s in d["sections"].items()}
        kw["material"] = Material(**d["material"])
        return cls(**kw)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


SUPPORT_DESCRIPTION = {
    "simply_supported": [
        "w = 0 on every node of the lower edge of both end bulkheads",
        "u = 0 at the bottom node nearest mid-width of the x = 0 bulkhead",
        "v = 0 at the bottom node nearest mid-width of both end bulkheads",
    ],
}


UNIFORM_PRESSURE, LINE_LOAD, HYDROSTATIC = "uniform_pressure", "four_point_line_load", "hydrostatic"


@dataclass
class LoadCase:
    """Global loading.  Pressures are positive inwards (towards the stiffeners).

    For ``hydrostatic`` the bottom pressure and draft are derived from the top
    pressure and the structural weight by ``resolve_hydrostatic``.
    """
    kind: str = UNIFORM_PRESSURE
    top_pressure: float = 0.0
    line_load: float = 0.0
    gravity: bool = False
    water_density: float = 1025.0
    bottom_pressure: float | None = None
    draft: float | None = None

    def __post_init__(self):
        if self.kind not in (UNIFORM_PRESSURE, LINE_LOAD, HYDROSTATIC):
            raise ValueError(f"unknown load kind {self.kind!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Wall:
    name: str
    kind: str
    p0: tuple   # (Y, Z), ordered so that the panel e2 axis runs from p0 to p1
    p1: tuple
    normal: tuple

    @property
    def length(self):
        return float(np.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]))


def _wall(name, kind, a, b, normal):
    e2 = np.array([normal[1], -normal[0]])          # e3 x e1 restricted to (Y, Z)
    if np.dot(np.subtract(b, a), e2) < 0:
        a, b = b, a
    return Wall(name, kind, tuple(map(float, a)), tuple(map(float, b)), tuple(map(float, normal)))


def cross_section_walls(config: BoxBeamConfig) -> list[Wall]:
    W, H = config.width, config.height
    walls = []
    if config.case_kind == TRIPLE_CELL:
        ys = [0.0, config.double_width, W - config.double_width, W]
        names = ("port", "centre", "starboard")
        for i, nm in enumerate(names):
            walls.append(_wall(f"bottom_{nm}", "bottom", (ys[i], 0.0), (ys[i + 1], 0.0), (0, -1)))
        for i, nm in enumerate(names):
            walls.append(_wall(f"top_{nm}", "top", (ys[i], H), (ys[i + 1], H), (0, 1)))
        walls.append(_wall("port", "side", (0.0, 0.0), (0.0, H), (-1, 0)))
        walls.append(_wall("starboard", "side", (W, 0.0), (W, H), (1, 0)))
        walls.append(_wall("inner_port", "inner_side", (ys[1], 0.0), (ys[1], H), (1, 0)))
        walls.append(_wall("inner_starboard", "inner_side", (ys[2], 0.0), (ys[2], H), (-1, 0)))
        return walls
    walls.append(_wall("bottom", "bottom", (0.0, 0.0), (W, 0.0), (0, -1)))
    walls.append(_wall("top", "top", (0.0, H), (W, H), (0, 1)))
    if config.case_kind == DOUBLE_BOTTOM:
        h = config.double_bottom_height
        walls.append(_wall("inner_bottom", "inner_bottom", (0.0, h), (W, h), (0, 1)))
        walls.append(_wall("port_db", "db_side", (0.0, 0.0), (0.0, h), (-1, 0)))
        walls.append(_wall("starboard_db", "db_side", (W, 0.0), (W, h), (1, 0)))
        walls.append(_wall("port", "side", (0.0, h), (0.0, H), (-1, 0)))
        walls.append(_wall("starboard", "side", (W, h), (W, H), (1, 0)))
    else:
        walls.append(_wall("port", "side", (0.0, 0.0), (0.0, H), (-1, 0)))
        walls.append(_wall("starboard", "side", (W, 0.0), (W, H), (1, 0)))
    return walls


@dataclass
class PanelInfo:
    panel_id: str
    wall: str
    kind: str
    bay: int
    section: PanelSection
    origin: np.ndarray      # global position of panel-local (0, 0)
    frame: np.ndarray       # rows e1, e2, e3
    node_grid: np.ndarray   # (nx + 1, ny + 1) node ids, [x index, y index]
    elements: np.ndarray    # (nx, ny) element ids
    edge_location: dict     # edge name -> description

    def to_local(self, points):
        return (np.asarray(points) - self.origin) @ self.frame.T


@dataclass
class GlobalMesh:
    config: BoxBeamConfig
    density: int
    nodes: np.ndarray
    conn: np.ndarray
    frames: np.ndarray
    element_kind: np.ndarray     # PANEL or BULKHEAD per element
    stiffness_id: np.ndarray
    stiffnesses: list
    panels: dict                 # panel_id -> PanelInfo
    bulkhead_x: np.ndarray
    fixed_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, int))
    _model: ShellModel | None = field(default=None, repr=False)

    @property
    def model(self) -> ShellModel:
        if self._model is None:
            self._model = ShellModel(self.nodes, self.conn, self.frames, self.stiffness_id,
                                     self.stiffnesses)
        return self._model

    @property
    def n_elements(self):
        return len(self.conn)


class _NodeTable:
    def __init__(self):
        self.ids = {}
        self.coords = []

    def get(self, p):
        key = tuple(np.round(np.asarray(p, dtype=float), 9) + 0.0)
        if key not in self.ids:
            self.ids[key] = len(self.coords)
            self.coords.append(key)
        return self.ids[key]


def check_conforming(nodes, conn):
    """Raise MeshError if a node lies inside an element edge (a hanging node)."""
    edges = np.concatenate([conn[:, [0, 1]], conn[:, [1, 2]], conn[:, [2, 3]], conn[:, [3, 0]]])
    edges = np.unique(np.sort(edges, axis=1), axis=0)
    a, b = nodes[edges[:, 0]], nodes[edges[:, 1]]
    mid, half = 0.5 * (a + b), 0.5 * np.linalg.norm(b - a, axis=1)
    tree = cKDTree(nodes)
    hits = tree.query_ball_point(mid, half * (1 - 1e-9))
    for k, cand in enumerate(hits):
        for c in cand:
            if c in edges[k]:
                continue
            ab = b[k] - a[k]
            s = np.dot(nodes[c] - a[k], ab) / np.dot(ab, ab)
            if np.linalg.norm(a[k] + s * ab - nodes[c]) <= 1e-9 * (2 * half[k]):
                raise MeshError(f"non-conforming junction: node {c} at {nodes[c].round(6).tolist()} "
                                f"lies inside the edge {a[k].round(6).tolist()} - "
                                f"{b[k].round(6).tolist()}")


def build_box_beam(config: BoxBeamConfig, density: int = 4) -> GlobalMesh:
    """Conforming quadrilateral mesh with ``density`` x ``density`` elements per panel."""
    if int(density) < 2:
        raise ValueError("mesh density must be at least 2")
    density = int(density)
    config.validate()
    walls = cross_section_walls(config)
    xb = np.linspace(0.0, config.length, config.bulkhead_count)
    xs = np.linspace(0.0, config.length, config.bays * density + 1)

    table = _NodeTable()
    conn, frames, kinds, sids = [], [], [], []
    stiffnesses = []
    panels = {}

    ys_lattice, zs_lattice = set(), set()
    for w in walls:
        t = np.linspace(0.0, 1.0, density + 1)
        if w.p0[1] == w.p1[1]:
            ys_lattice.update(np.round(w.p0[0] + t * (w.p1[0] - w.p0[0]), 12))
        else:
            zs_lattice.update(np.round(w.p0[1] + t * (w.p1[1] - w.p0[1]), 12))

    for w in walls:
        n3 = np.array([0.0, *w.normal])
        e1 = np.array([1.0, 0.0, 0.0])
        frame = np.array([e1, np.cross(n3, e1), n3])
        p0, p1 = np.array([0.0, *w.p0]), np.array([0.0, *w.p1])
        s = np.linspace(0.0, 1.0, density + 1)
        for bay in range(config.bays):
            section = replace(config.section_template(w.kind), span=config.bay_length,
                              width=w.length, material=config.material)
            try:
                section.validate()
            except SectionError as exc:
                raise MeshError(f"panel {w.name}/bay{bay}: {exc}") from exc
            sid = len(stiffnesses)
            stiffnesses.append(abd_from_section(section))
            x_loc = xs[bay * density:(bay + 1) * density + 1]
            grid = np.empty((density + 1, density + 1), dtype=int)
            for i, x in enumerate(x_loc):
                for j, sj in enumerate(s):
                    p = p0 + sj * (p1 - p0)
                    p[0] = x
                    grid[i, j] = table.get(p)
            elems = np.empty((density, density), dtype=int)
            for i in range(density):
                for j in range(density):
                    elems[i, j] = len(conn)
                    conn.append([grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]])
                    frames.append(frame)
                    kinds.append(PANEL)
                    sids.append(sid)
            pid = f"{w.name}_b{bay}"
            panels[pid] = PanelInfo(
                pid, w.name, w.kind, bay, section, np.array([xb[bay], *w.p0]), frame, grid, elems,
                {"x0": f"bulkhead {bay} at x = {xb[bay]:.4g} m",
                 "x1": f"bulkhead {bay + 1} at x = {xb[bay + 1]:.4g} m",
                 "y0": f"girder line (Y, Z) = {w.p0}", "y1": f"girder line (Y, Z) = {w.p1}"})

    bh_sid = len(stiffnesses)
    stiffnesses.append(isotropic_stiffness(config.bulkhead_thickness, config.material))
    yl, zl = np.array(sorted(ys_lattice)), np.array(sorted(zs_lattice))
    bh_frame = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    for x in xb:
        for j in range(len(zl) - 1):
            for i in range(len(yl) - 1):
                quad = [table.get((x, yl[i], zl[j])), table.get((x, yl[i + 1], zl[j])),
                        table.get((x, yl[i + 1], zl[j + 1])), table.get((x, yl[i], zl[j + 1]))]
                conn.append(quad)
                frames.append(bh_frame)
                kinds.append(BULKHEAD)
                sids.append(bh_sid)

    nodes = np.array(table.coords, dtype=float)
    conn = np.array(conn, dtype=int)
    check_conforming(nodes, conn)
    mesh = GlobalMesh(config, density, nodes, conn, np.array(frames), np.array(kinds),
                      np.array(sids), stiffnesses, panels, xb)
    mesh.fixed_dofs = support_dofs(mesh)
    return mesh


def support_dofs(mesh: GlobalMesh) -> np.ndarray:
    cfg = mesh.config
    if cfg.supports not in SUPPORT_DESCRIPTION:
        raise ValueError(f"unknown support set {cfg.supports!r}")
    X, Y, Z = mesh.nodes.T
    tol = 1e-9
    fixed = []
    for x_end in (0.0, cfg.length):
        line = np.flatnonzero((np.abs(X - x_end) < tol) & (np.abs(Z) < tol))
        fixed.extend(6 * line + 2)
        centre = line[np.argmin(np.abs(Y[line] - 0.5 * cfg.width))]
        fixed.append(6 * centre + 1)
        if x_end == 0.0:
            fixed.append(6 * centre)
    return np.unique(np.array(fixed, dtype=int))


def structural_weight(mesh: GlobalMesh) -> float:
    return float(_gravity_traction(mesh) @ _element_areas(mesh))


def _element_areas(mesh):
    P = mesh.nodes[mesh.conn]
    return 0.5 * np.linalg.norm(np.cross(P[:, 2] - P[:, 0], P[:, 3] - P[:, 1]), axis=1)


def _gravity_traction(mesh):
    """Weight per unit area of every element (N/m^2)."""
    rho = mesh.config.material.density
    teq = np.empty(mesh.n_elements)
    for pinfo in mesh.panels.values():
        s = pinfo.section
        extra = 0.0 if s.is_bare else (s.web_thickness * s.web_height
                                       + s.flange_thickness * s.flange_width) / s.spacing
        teq[pinfo.elements.ravel()] = s.plate_thickness + extra
    teq[mesh.element_kind == BULKHEAD] = mesh.config.bulkhead_thickness
    return rho * GRAVITY * teq


def resolve_hydrostatic(mesh: GlobalMesh, load: LoadCase) -> LoadCase:
    """Fill bottom pressure and draft so that buoyancy balances top load plus weight."""
    if load.kind != HYDROSTATIC:
        return load
    weight = structural_weight(mesh) if load.gravity else 0.0
    cfg = mesh.config
    p_bot = load.top_pressure + weight / (cfg.width * cfg.length)
    return replace(load, bottom_pressure=p_bot, draft=p_bot / (load.water_density * GRAVITY))


def wall_pressure(mesh: GlobalMesh, load: LoadCase, kind: str, wall: str, Z):
    """Inward pressure (Pa) on a wall at heights Z."""
    Z = np.asarray(Z, dtype=float)
    zero = np.zeros_like(Z)
    if load.kind in (UNIFORM_PRESSURE, HYDROSTATIC) and kind == "top":
        return zero + load.top_pressure
    if load.kind == HYDROSTATIC:
        load = resolve_hydrostatic(mesh, load)
        if kind == "bottom":
            return zero + load.bottom_pressure
        outer_side = kind in ("side", "db_side")
        if outer_side:
            return load.water_density * GRAVITY * np.maximum(load.draft - Z, 0.0)
    return zero


def load_vector(mesh: GlobalMesh, load: LoadCase) -> np.ndarray:
    model = mesh.model
    f = np.zeros(model.n_dof)
    p_nodes = np.zeros((mesh.n_elements, 4))
    walls = {w.name: w for w in cross_section_walls(mesh.config)}
    for pinfo in mesh.panels.values():
        e = pinfo.elements.ravel()
        p_nodes[e] = wall_pressure(mesh, load, walls[pinfo.wall].kind, pinfo.wall,
                                   mesh.nodes[mesh.conn[e]][..., 2])
    if np.any(p_nodes):
        f += model.pressure_load(p_nodes)
    if load.kind == LINE_LOAD and load.line_load:
        cfg = mesh.config
        X, Y, Z = mesh.nodes.T
        for x in mesh.bulkhead_x[1:-1]:
            line = np.flatnonzero((np.abs(X - x) < 1e-9) & (np.abs(Z - cfg.height) < 1e-9))
            line = line[np.argsort(Y[line])]
            y = Y[line]
            trib = np.zeros(len(y))
            trib[:-1] += 0.5 * np.diff(y)
            trib[1:] += 0.5 * np.diff(y)
            f[6 * line + 2] -= load.line_load * trib
    if load.gravity:
        traction = np.zeros((mesh.n_elements, 3))
        traction[:, 2] = -_gravity_traction(mesh)
        f += model.area_load(traction)
    return f


@dataclass
class GlobalSolution:
    d: np.ndarray            # (n_nodes, 6): u, v, w, theta_x, theta_y, theta_z
    reactions: np.ndarray    # (n_nodes, 6)
    load: np.ndarray         # (n_nodes, 6) applied nodal forces
    energy: float

    @property
    def flat(self):
        return self.d.ravel()


def assemble_and_solve(mesh: GlobalMesh, load: LoadCase, supports=None, method="direct"):
    """Linear static solve.  ``supports`` overrides the mesh's constrained DOFs."""
    fixed = mesh.fixed_dofs if supports is None else np.asarray(supports, dtype=int)
    f = load_vector(mesh, load)
    sol: Solution = solve_linear(mesh.model.stiffness_matrix(), f, fixed, nodes=mesh.nodes,
                                 method=method)
    n = len(mesh.nodes)
    return GlobalSolution(sol.d.reshape(n, 6), sol.reactions.reshape(n, 6), f.reshape(n, 6),
                          sol.energy)


def element_resultants(mesh: GlobalMesh, solution: GlobalSolution, elements=None,
                       xi=0.0, eta=0.0) -> ResultantState:
    """Membrane forces, moments and shear forces (element frame) at (xi, eta)."""
    sel = np.arange(mesh.n_elements) if elements is None else np.atleast_1d(elements)
    eps0, eps1, gamma = mesh.model.strains_at(solution.flat, xi, eta, sel)
    N, M, Q = np.zeros_like(eps0), np.zeros_like(eps0), np.zeros_like(gamma)
    sid = mesh.stiffness_id[sel]
    for s in np.unique(sid):
        k = sid == s
        abd: AbdStiffness = mesh.stiffnesses[s]
        N[k] = eps0[k] @ abd.A.T + eps1[k] @ abd.Bc.T
        M[k] = eps0[k] @ abd.Bc.T + eps1[k] @ abd.D.T
        Q[k] = gamma[k] @ abd.shear.T
    return ResultantState(N, M, Q)


def panel_resultant_field(mesh: GlobalMesh, solution: GlobalSolution, panel_id: str):
    """Callable (x, y) -> (N, M) on panel-local points, bilinear in nodally averaged resultants."""
    from scipy.interpolate import RegularGridInterpolator

    p = mesh.panels[panel_id]
    nx, ny = p.elements.shape
    acc = np.zeros((nx + 1, ny + 1, 6))
    cnt = np.zeros((nx + 1, ny + 1, 1))
    corners = ((-1, -1, 0, 0), (1, -1, 1, 0), (1, 1, 1, 1), (-1, 1, 0, 1))
    for xi, eta, di, dj in corners:
        r = element_resultants(mesh, solution, p.elements.ravel(), xi, eta)
        vals = np.concatenate([r.N, r.M], axis=1).reshape(nx, ny, 6)
        acc[di:di + nx, dj:dj + ny] += vals
        cnt[di:di + nx, dj:dj + ny] += 1
    acc /= cnt
    xs = np.linspace(0.0, p.section.span, nx + 1)
    ys = np.linspace(0.0, p.section.width, ny + 1)
    interp = RegularGridInterpolator((xs, ys), acc)

    def field_fn(x, y):
        x = np.clip(np.asarray(x, dtype=float), 0.0, xs[-1])
        y = np.clip(np.asarray(y, dtype=float), 0.0, ys[-1])
        v = interp(np.stack([x, y], axis=-1))
        return v[..., :3], v[..., 3:]
    return field_fn


def _rotate_dofs(d, frame):
    out = np.empty_like(d)
    out[..., :3] = d[..., :3] @ frame.T
    out[..., 3:] = d[..., 3:] @ frame.T
    return out


def extract_edge_kinematics(mesh: GlobalMesh, solution: GlobalSolution, panel_id: str,
                            n: int = EDGE_STATIONS):
    """Panel-frame DOFs at ``n`` uniform stations on the four panel edges.

    Edges: x0 / x1 are the bulkhead ends (stations along y), y0 / y1 the
    longitudinal edges (stations along x).
    """
    from .boundary import EdgeKinematics

    p = mesh.panels[panel_id]
    L, B = p.section.span, p.section.width
    lines = {"x0": (p.node_grid[0, :], B), "x1": (p.node_grid[-1, :], B),
             "y0": (p.node_grid[:, 0], L), "y1": (p.node_grid[:, -1], L)}
    values, stations = {}, {}
    for name in EDGE_NAMES:
        ids, length = lines[name]
        s_nodes = np.linspace(0.0, length, len(ids))
        s = np.linspace(0.0, length, n)
        nodal = _rotate_dofs(solution.d[ids], p.frame)
        values[name] = np.column_stack([np.interp(s, s_nodes, nodal[:, k]) for k in range(6)])
        stations[name] = s
    return EdgeKinematics(values, stations, dict(p.edge_location), panel_id)


def write_solution_csv(mesh: GlobalMesh, solution: GlobalSolution, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "x", "y", "z", "u", "v", "w", "theta_x", "theta_y", "theta_z"])
        for i, (p, d) in enumerate(zip(mesh.nodes, solution.d)):
            w.writerow([i, *(f"{v:.9g}" for v in p), *(f"{v:.12e}" for v in d)])


def read_solution_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 1:4], data[:, 4:10]


def midspan_deflection(mesh: GlobalMesh, solution: GlobalSolution) -> float:
    """Hull-girder deflection: mean vertical displacement of the outer side-wall
    nodes in the midspan cross-section (excludes local plate bending)."""
    X, Y, Z = mesh.nodes.T
    cfg = mesh.config
    sec = np.abs(X - 0.5 * cfg.length) < 1e-9
    if not sec.any():
        raise ValueError("no mesh section at midspan; use an even density or bay count")
    side = sec & ((np.abs(Y) < 1e-9) | (np.abs(Y - cfg.width) < 1e-9))
    return float(solution.d[side, 2].mean())
