"""Heterogeneous graph encoding of a stiffened panel.

Node types
  geometry    one per rectangular strip (plate bay, web, flange)
  plate_edge  one per distinct strip edge; an edge node links to every strip
              whose closure contains it (a web meets its flange along the
              flange centre line, so that line links web and flange)
  loading     one per loaded bay: 10 pressure samples across the bay
  boundary    one per constrained strip edge: 60 stations x 6 DOFs,
              station-major, DOF-minor

Edge types tell strip-aligned ("parallel", along the stiffeners) from
"transverse" connections; loading uses "applied".  Every relation is stored in
both directions, the reverse carrying a ``rev_`` prefix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .boundary import EDGE_STATIONS, PanelBoundary
from .cross_section import PanelSection
from .strips import BAY, FLANGE, GRID_ROWS, GRID_SIZE, STRIP_KINDS, WEB, FieldGrid, Strip, \
    panel_strips
from . import serialization

GEOMETRY, PLATE_EDGE, LOADING, BOUNDARY = "geometry", "plate_edge", "loading", "boundary"
NODE_TYPES = (GEOMETRY, PLATE_EDGE, LOADING, BOUNDARY)
FEATURE_DIMS = {GEOMETRY: 10, PLATE_EDGE: 6, LOADING: GRID_ROWS, BOUNDARY: 6 * EDGE_STATIONS}
TARGET_DIM = GRID_SIZE
PARALLEL, TRANSVERSE, APPLIED = "parallel", "transverse", "applied"
STRIP_EDGES = ("x0", "x1", "r0", "r1")

GRAPH_MAGIC = b"HKGRAPH\x00"
GRAPH_VERSION = 1


class GraphError(ValueError):
    pass


@dataclass
class HeteroGraph:
    x: dict                      # node type -> (n, FEATURE_DIMS[type])
    edges: dict                  # (src type, edge type, dst type) -> (2, E) int array
    strip_names: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def num_nodes(self, ntype):
        return self.x[ntype].shape[0] if ntype in self.x else 0

    def counts(self):
        return tuple(self.num_nodes(t) for t in NODE_TYPES)

    def validate(self):
        for t, v in self.x.items():
            if t not in FEATURE_DIMS:
                raise GraphError(f"unknown node type {t!r}")
            if v.ndim != 2 or v.shape[1] != FEATURE_DIMS[t]:
                raise GraphError(f"{t} features must have width {FEATURE_DIMS[t]}, got {v.shape}")
            if not np.all(np.isfinite(v)):
                raise GraphError(f"non-finite {t} features")
        for (s, e, d), idx in self.edges.items():
            idx = np.asarray(idx)
            if idx.ndim != 2 or idx.shape[0] != 2:
                raise GraphError(f"edge index of {(s, e, d)} must be (2, E)")
            if idx.size and (idx[0].max() >= self.num_nodes(s) or idx[1].max() >= self.num_nodes(d)
                             or idx.min() < 0):
                raise GraphError(f"edge index out of range in {(s, e, d)}")

    def is_connected(self):
        offs, n = {}, 0
        for t in NODE_TYPES:
            offs[t] = n
            n += self.num_nodes(t)
        if n == 0:
            return False
        rows, cols = [], []
        for (s, _, d), idx in self.edges.items():
            rows.append(idx[0] + offs[s])
            cols.append(idx[1] + offs[d])
        if rows:
            r, c = np.concatenate(rows), np.concatenate(cols)
        else:
            r = c = np.zeros(0, int)
        A = coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
        return connected_components(A, directed=False)[0] == 1

    def permuted(self, ntype, perm):
        """Relabel nodes of one type: new node i is old node perm[i]."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        x = dict(self.x)
        x[ntype] = self.x[ntype][perm]
        edges = {}
        for (s, e, d), idx in self.edges.items():
            idx = idx.copy()
            if s == ntype:
                idx[0] = inv[idx[0]]
            if d == ntype:
                idx[1] = inv[idx[1]]
            edges[(s, e, d)] = idx
        names = self.strip_names
        if ntype == GEOMETRY and names:
            names = [names[i] for i in perm]
        return HeteroGraph(x, edges, list(names))

    def scaled_boundary(self, alpha):
        x = dict(self.x)
        if BOUNDARY in x:
            x[BOUNDARY] = alpha * x[BOUNDARY]
        return HeteroGraph(x, {k: v.copy() for k, v in self.edges.items()}, list(self.strip_names))

    def to_bytes(self) -> bytes:
        arrays = {f"x/{t}": v for t, v in self.x.items()}
        rels = sorted(self.edges)
        for i, r in enumerate(rels):
            arrays[f"e/{i}"] = np.asarray(self.edges[r], dtype=np.int64)
        meta = {"relations": [list(r) for r in rels], "strips": self.strip_names}
        return serialization.pack(GRAPH_MAGIC, GRAPH_VERSION, meta, arrays)

    @classmethod
    def from_bytes(cls, data: bytes):
        meta, arrays = serialization.unpack(data, GRAPH_MAGIC, GRAPH_VERSION)
        x = {k[2:]: v for k, v in arrays.items() if k.startswith("x/")}
        edges = {tuple(r): arrays[f"e/{i}"] for i, r in enumerate(meta["relations"])}
        return cls(x, edges, meta["strips"])


def _strip_edges(strip: Strip, span):
    """Edge name -> (endpoint a, endpoint b, orientation) in panel coordinates."""
    a = np.array([0.0, *strip.p0])
    b = np.array([0.0, *strip.p1])
    L = np.array([span, 0.0, 0.0])
    return {"x0": (a, b, TRANSVERSE), "x1": (a + L, b + L, TRANSVERSE),
            "r0": (a, a + L, PARALLEL), "r1": (b, b + L, PARALLEL)}


def _in_closure(p, strip: Strip, span, tol=1e-9):
    o = np.array([0.0, *strip.p0])
    ex = np.array([span, 0.0, 0.0])
    er = np.array([0.0, strip.p1[0] - strip.p0[0], strip.p1[1] - strip.p0[1]])
    rel = p - o
    a = rel @ ex / (ex @ ex)
    b = rel @ er / (er @ er)
    scale = max(span, strip.width)
    return (np.linalg.norm(rel - a * ex - b * er) <= tol * scale
            and -tol <= a <= 1 + tol and -tol <= b <= 1 + tol)


def geometry_features(strip: Strip, span, material):
    onehot = [float(strip.kind == k) for k in STRIP_KINDS]
    cy = 0.5 * (strip.p0[0] + strip.p1[0])
    cz = 0.5 * (strip.p0[1] + strip.p1[1])
    return np.array(onehot + [strip.width, strip.thickness, span, material.youngs_modulus / 1e9,
                              material.poisson_ratio, cy, cz])


def encode_layout(strips, span, material, loads=None, boundary=None) -> HeteroGraph:
    """Graph of an arbitrary strip layout.

    ``loads`` maps strip index -> 10 pressure samples; ``boundary`` is a list of
    (strip index, edge name in STRIP_EDGES, (60, 6) DOF array).
    """
    loads = loads or {}
    boundary = boundary or []
    edge_key, edge_pts = {}, []
    geo_edge = {PARALLEL: [], TRANSVERSE: []}
    strip_edge_id = {}
    for k, s in enumerate(strips):
        for name, (a, b, orient) in _strip_edges(s, span).items():
            key = tuple(sorted([tuple(np.round(a, 9) + 0.0), tuple(np.round(b, 9) + 0.0)]))
            if key not in edge_key:
                edge_key[key] = len(edge_pts)
                edge_pts.append((a, b, orient))
            strip_edge_id[(k, name)] = edge_key[key]
    for eid, (a, b, orient) in enumerate(edge_pts):
        for k, s in enumerate(strips):
            if _in_closure(a, s, span) and _in_closure(b, s, span):
                geo_edge[orient].append((k, eid))
    pe_feat = np.array([[float(o == PARALLEL), float(o == TRANSVERSE), np.linalg.norm(b - a),
                         *(0.5 * (a + b))] for a, b, o in edge_pts])

    x = {GEOMETRY: np.array([geometry_features(s, span, material) for s in strips]),
         PLATE_EDGE: pe_feat.reshape(-1, FEATURE_DIMS[PLATE_EDGE])}
    edges = {}

    def add(src, et, dst, pairs):
        if not pairs:
            return
        idx = np.array(pairs, dtype=np.int64).T
        edges[(src, et, dst)] = idx
        edges[(dst, "rev_" + et, src)] = idx[::-1].copy()

    for orient, pairs in geo_edge.items():
        add(GEOMETRY, orient, PLATE_EDGE, pairs)

    load_rows, load_pairs = [], []
    for k in sorted(loads):
        samples = np.asarray(loads[k], float)
        if samples.shape != (FEATURE_DIMS[LOADING],):
            raise GraphError(f"loading feature must hold {FEATURE_DIMS[LOADING]} samples")
        load_pairs.append((len(load_rows), k))
        load_rows.append(samples)
    if load_rows:
        x[LOADING] = np.array(load_rows)
        add(LOADING, APPLIED, GEOMETRY, load_pairs)

    b_rows, b_geo, b_edge = [], {PARALLEL: [], TRANSVERSE: []}, {PARALLEL: [], TRANSVERSE: []}
    for k, name, values in boundary:
        values = np.asarray(values, float)
        if values.shape != (EDGE_STATIONS, 6):
            raise GraphError(f"boundary data must be {EDGE_STATIONS} x 6, got {values.shape}")
        if (k, name) not in strip_edge_id:
            raise GraphError(f"boundary on unknown strip edge {(k, name)}")
        orient = PARALLEL if name.startswith("r") else TRANSVERSE
        b_geo[orient].append((len(b_rows), k))
        b_edge[orient].append((len(b_rows), strip_edge_id[(k, name)]))
        b_rows.append(values.reshape(-1))
    if b_rows:
        x[BOUNDARY] = np.array(b_rows)
        for orient in (PARALLEL, TRANSVERSE):
            add(BOUNDARY, orient, GEOMETRY, b_geo[orient])
            add(BOUNDARY, orient, PLATE_EDGE, b_edge[orient])
    g = HeteroGraph(x, edges, [s.name for s in strips])
    if not g.is_connected():
        raise GraphError("encoded graph is not connected")
    return g


def _bay_resample(record, y0, y1):
    s = record.points[:, 1]
    y = np.linspace(y0, y1, EDGE_STATIONS)
    return np.column_stack([np.interp(y, s, record.values[:, j]) for j in range(6)])


def encode_panel(section: PanelSection, loads, boundary: PanelBoundary) -> HeteroGraph:
    """Graph of a T-stiffened panel with all member edges constrained.

    ``loads`` holds one LocalLoad (or None) per bay.
    """
    strips = panel_strips(section)
    bays = [k for k, s in enumerate(strips) if s.kind == BAY]
    if loads is not None and len(loads) != len(bays):
        raise GraphError(f"expected {len(bays)} bay loads, got {len(loads)}")
    load_map = {}
    for b, k in enumerate(bays):
        ld = loads[b] if loads is not None else None
        if ld is not None and not ld.is_zero:
            load_map[k] = ld.samples(FEATURE_DIMS[LOADING])
    bnd = []
    for b, k in enumerate(bays):
        y0, y1 = strips[k].p0[0], strips[k].p1[0]
        for end in ("x0", "x1"):
            bnd.append((k, end, _bay_resample(boundary.records[f"plate_{end}"], y0, y1)))
    bnd.append((bays[0], "r0", boundary.records["plate_y0"].values))
    bnd.append((bays[-1], "r1", boundary.records["plate_y1"].values))
    for k, s in enumerate(strips):
        if s.kind in (WEB, FLANGE):
            for end in ("x0", "x1"):
                rec = boundary.records.get(f"{s.name}_{end}")
                if rec is None:
                    raise GraphError(f"missing boundary record {s.name}_{end}")
                bnd.append((k, end, rec.values))
    return encode_layout(strips, section.span, section.material, load_map, bnd)


def pack_targets(grids, n_geometry=None) -> np.ndarray:
    """Per-strip FieldGrids -> (n_strips, 500) block, row-major per grid."""
    if n_geometry is not None and len(grids) != n_geometry:
        raise GraphError(f"{len(grids)} grids for {n_geometry} geometry nodes")
    return np.stack([np.asarray(g.values, float).reshape(TARGET_DIM) for g in grids])


def unpack_targets(block, strip_names, field_name="vm"):
    block = np.asarray(block, float)
    if block.ndim != 2 or block.shape[1] != TARGET_DIM:
        raise GraphError(f"target block must be (n, {TARGET_DIM})")
    if block.shape[0] != len(strip_names):
        raise GraphError(f"{block.shape[0]} target rows for {len(strip_names)} strips")
    return [FieldGrid(row.reshape(GRID_ROWS, -1), name, field_name)
            for row, name in zip(block, strip_names)]
