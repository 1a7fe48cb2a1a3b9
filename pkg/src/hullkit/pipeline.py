"""End-to-end orchestration: sample box-beam designs, solve the global ESL model,
recover panel boundaries, run the panel oracle, encode graphs, train and evaluate
surrogates, and run the comparison studies.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import serialization, svg
from .boundary import recover_boundary
from .cross_section import STEEL, PanelSection, SectionError
from .esl_global import (
    DOUBLE_BOTTOM, GRAVITY, HYDROSTATIC, LINE_LOAD, SINGLE_CELL, TRIPLE_CELL, UNIFORM_PRESSURE,
    BoxBeamConfig, LoadCase, MeshError, assemble_and_solve, build_box_beam,
    cross_section_walls, extract_edge_kinematics, panel_resultant_field, wall_pressure,
)
from .graph import GEOMETRY, GraphError, HeteroGraph, encode_panel
from .hgt import HgtConfig, batch_graphs, predict, train
from .hgt import checkpoint as ckpt
from .localization import BcAssumption, LocalLoad, esl_stress_field
from .panel_oracle import MIN_FLANGE, MIN_PER_BAY, MIN_WEB, build_panel_mesh, field_grids, refinement_change, solve_panel
from .shell import SolverError
from .strips import BAY, GRID_COLS, GRID_ROWS, panel_strips

log = logging.getLogger("hullkit")

DATASET_MAGIC = b"HKDATSET"
RECORD_MAGIC = b"HKRECORD"
DATASET_VERSION = 1
TARGET_FIELDS = ("u1", "u2", "u3", "vm")
UNITS = {"vm": ("MPa", 1e-6), "u1": ("mm", 1e3), "u2": ("mm", 1e3), "u3": ("mm", 1e3)}
BCS = ("ff", "ss", "gf")

# Table 1 limits in metres (counts are integers)
TABLE1 = {
    1: {"plate_thickness": (0.010, 0.020), "web_thickness": (0.005, 0.020),
        "web_height": (0.100, 0.200), "flange_thickness": (0.005, 0.020),
        "flange_width": (0.050, 0.100), "stiffener_count": (2, 7)},
    3: {"plate_thickness": (0.005, 0.010), "web_thickness": (0.004, 0.008),
        "web_height": (0.100, 0.200), "flange_thickness": (0.004, 0.008),
        "flange_width": (0.050, 0.100), "stiffener_count": (2, 7)},
}
TABLE1[2] = TABLE1[1]
LOAD_RANGES = {1: (1.11e5, 3.33e5), 2: (5.0e5, 1.5e6), 3: (6.17e4, 1.85e5)}
CASE_KIND = {1: SINGLE_CELL, 2: DOUBLE_BOTTOM, 3: TRIPLE_CELL}
CASE_BOX = {1: {}, 2: {"double_bottom_height": 0.4}, 3: {"width": 7.0}}
DOUBLE_WIDTH_RANGE = (1.5, 2.5)
# the narrowest plate strip kept between flanges, as a multiple of the flange width
MIN_SPACING_FACTOR = 1.25
REFINEMENT_GATE = 0.03


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    case: int = 1
    ranges: dict = None
    load_range: tuple = None
    samples: int = 10
    seed: int = 0
    global_density: int = 4
    oracle_density: tuple = (10, 6, 4, 24)   # per bay, per web, per flange, along span
    out_dir: str = "hullkit-data"
    target: str = "vm"
    paper_faithful: bool = True
    refinement_checks: int = 1
    jsonl: bool = False
    box: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.ranges is None:
            self.ranges = {k: tuple(v) for k, v in TABLE1.get(self.case, TABLE1[1]).items()}
        else:
            self.ranges = {k: tuple(v) for k, v in self.ranges.items()}
        if self.load_range is None:
            self.load_range = LOAD_RANGES.get(self.case, LOAD_RANGES[1])
        self.load_range = tuple(self.load_range)
        self.oracle_density = tuple(int(v) for v in self.oracle_density)
        self.validate()

    def validate(self):
        if self.case not in CASE_KIND:
            raise ConfigError(f"case must be 1, 2 or 3, got {self.case}")
        if self.samples < 1:
            raise ConfigError("sample count must be positive")
        if self.target not in TARGET_FIELDS:
            raise ConfigError(f"target must be one of {TARGET_FIELDS}")
        if set(self.ranges) != set(TABLE1[1]):
            raise ConfigError(f"ranges must give exactly {sorted(TABLE1[1])}")
        for k, (lo, hi) in self.ranges.items():
            if not 0 < lo <= hi:
                raise ConfigError(f"range {k} = ({lo}, {hi}) is not a positive interval")
        qlo, qhi = self.load_range
        if not 0 < qlo <= qhi:
            raise ConfigError(f"load range ({qlo}, {qhi}) is not a positive interval")
        if self.paper_faithful:
            for k, (lo, hi) in self.ranges.items():
                plo, phi = TABLE1[self.case][k]
                if lo < plo - 1e-12 or hi > phi + 1e-12:
                    raise ConfigError(f"{k} range ({lo}, {hi}) outside the Table 1 bounds "
                                      f"({plo}, {phi}) for case {self.case}")
            plo, phi = LOAD_RANGES[self.case]
            if qlo < plo * (1 - 1e-12) or qhi > phi * (1 + 1e-12):
                raise ConfigError(f"load range outside ({plo}, {phi}) for case {self.case}")
        if self.global_density < 2:
            raise ConfigError("global mesh density must be at least 2")
        mins = (MIN_PER_BAY, MIN_WEB, MIN_FLANGE, 2)
        if len(self.oracle_density) != 4 or any(v < m for v, m in zip(self.oracle_density, mins)):
            raise ConfigError(f"oracle density {self.oracle_density} below the minimum {mins} "
                              "(per bay, per web, per flange, along span)")
        unknown = set(self.box) - {"length", "width", "height", "bulkhead_count",
                                   "bulkhead_thickness", "double_bottom_height"}
        if unknown:
            raise ConfigError(f"unknown box overrides {sorted(unknown)}")

    def to_dict(self):
        d = asdict(self)
        d["ranges"] = {k: list(v) for k, v in self.ranges.items()}
        d["load_range"] = list(self.load_range)
        d["oracle_density"] = list(self.oracle_density)
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------- sampling

def _design_rng(seed, design):
    return np.random.default_rng([int(seed), int(design)])


def _max_count(wall_width, flange_width, hi):
    n = hi
    while n > 2 and wall_width / (n + 1) < MIN_SPACING_FACTOR * flange_width:
        n -= 1
    return n


def sample_design(cfg: ExperimentConfig, design: int):
    """Box-beam geometry and load case for one design id (deterministic in seed and id)."""
    rng = _design_rng(cfg.seed, design)
    box = dict(CASE_BOX[cfg.case])
    box.update(cfg.box)
    if cfg.case == 3:
        box["double_width"] = round(float(rng.uniform(*DOUBLE_WIDTH_RANGE)), 4)
    base = BoxBeamConfig(case_kind=CASE_KIND[cfg.case], **box)
    widths = {}
    for w in cross_section_walls(base):
        widths[w.kind] = min(widths.get(w.kind, math.inf), w.length)
    r = cfg.ranges
    sections = {}
    for kind in sorted(widths):
        dims = [round(float(rng.uniform(*r[k])), 4) for k in
                ("plate_thickness", "web_thickness", "web_height", "flange_thickness",
                 "flange_width")]
        lo, hi = (int(v) for v in r["stiffener_count"])
        hi = max(lo, _max_count(widths[kind], dims[4], hi))
        count = int(rng.integers(lo, hi + 1))
        sections[kind] = PanelSection(*dims, count, base.bay_length, widths[kind], STEEL)
    beam = replace(base, sections=sections)
    q = float(rng.uniform(*cfg.load_range))
    if cfg.case == 1:
        load = LoadCase(UNIFORM_PRESSURE, top_pressure=q)
    elif cfg.case == 2:
        load = LoadCase(LINE_LOAD, line_load=q)
    else:
        load = LoadCase(HYDROSTATIC, top_pressure=q, gravity=True)
    return beam, load


# ---------------------------------------------------------------- panel loads

def _fit_local_load(y, p, l):
    """LocalLoad reproducing samples p(y) of a piecewise linear pressure on [0, l]."""
    scale = np.abs(p).max()
    if scale == 0:
        return None
    tol = 1e-9 * scale
    if np.ptp(p) <= tol:
        return LocalLoad.uniform(float(p.mean()), l)
    lin = np.polyval(np.polyfit(y, p, 1), y)
    if np.abs(lin - p).max() <= 1e-7 * scale:
        return LocalLoad.trapezoid(float(p[0]), float(p[-1]), l)
    mirrored = abs(p[-1]) <= tol
    if mirrored:
        y, p = (l - y)[::-1], p[::-1]
    if abs(p[0]) > tol:
        raise ValueError("pressure in a bay is neither linear nor a partial triangle")
    act = np.abs(p) > tol
    slope, icpt = np.polyfit(y[act], p[act], 1)
    a = float(np.clip(-icpt / slope, 0.0, l))
    return replace(LocalLoad.triangle(float(p[-1]), a, l), mirrored=mirrored)


def panel_local_loads(mesh, load: LoadCase, panel_id: str, n=41):
    """One LocalLoad (or None) per bay of a global panel, from the wall pressure."""
    p = mesh.panels[panel_id]
    sec = p.section
    ys = np.concatenate([[0.0], sec.stiffener_positions(), [sec.width]])
    out = []
    for y0, y1 in zip(ys[:-1], ys[1:]):
        y = np.linspace(y0, y1, n)
        Z = p.origin[2] + y * p.frame[1, 2]
        pr = np.asarray(wall_pressure(mesh, load, p.kind, p.wall, Z), float)
        out.append(_fit_local_load(y - y0, pr, y1 - y0))
    return out


# ---------------------------------------------------------------- records

@dataclass
class PanelRecord:
    record_id: str
    design: int
    panel_id: str
    case: int
    section: PanelSection
    loads: list                # LocalLoad or None per bay
    graph: HeteroGraph
    targets: dict              # field -> (n_strips, 500)
    esl: dict                  # bc -> ESL-analytic von Mises (n_strips, 500)
    boundary: dict             # plate edge -> (60, 6)

    @property
    def strip_names(self):
        return list(self.graph.strip_names)

    def to_bytes(self) -> bytes:
        arrays = {"graph": np.frombuffer(self.graph.to_bytes(), dtype=np.uint8)}
        arrays.update({f"y/{k}": v for k, v in self.targets.items()})
        arrays.update({f"esl/{k}": v for k, v in self.esl.items()})
        arrays.update({f"bnd/{k}": v for k, v in self.boundary.items()})
        meta = {"record_id": self.record_id, "design": self.design, "panel_id": self.panel_id,
                "case": self.case, "section": self.section.to_dict(),
                "loads": [ld.to_dict() if ld is not None else None for ld in self.loads]}
        return serialization.pack(RECORD_MAGIC, DATASET_VERSION, meta, arrays)

    @classmethod
    def from_bytes(cls, data: bytes):
        meta, arrays = serialization.unpack(data, RECORD_MAGIC, DATASET_VERSION)
        g = HeteroGraph.from_bytes(arrays.pop("graph").tobytes())

        def grp(prefix):
            return {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)}
        loads = [LocalLoad.from_dict(d) if d is not None else None for d in meta["loads"]]
        return cls(meta["record_id"], meta["design"], meta["panel_id"], meta["case"],
                   PanelSection.from_dict(meta["section"]), loads, g, grp("y/"), grp("esl/"),
                   grp("bnd/"))

    def to_json(self) -> str:
        d = {"record_id": self.record_id, "design": self.design, "panel_id": self.panel_id,
             "case": self.case, "section": self.section.to_dict(),
             "loads": [ld.to_dict() if ld is not None else None for ld in self.loads],
             "strips": self.strip_names,
             "graph": {"x": {k: v.tolist() for k, v in self.graph.x.items()},
                       "edges": [[list(r), v.tolist()] for r, v in sorted(self.graph.edges.items())]},
             "targets": {k: v.tolist() for k, v in self.targets.items()},
             "esl": {k: v.tolist() for k, v in self.esl.items()},
             "boundary": {k: v.tolist() for k, v in self.boundary.items()}}
        return json.dumps(d, sort_keys=True)


def _grids_to_block(grids):
    return np.stack([g.values.reshape(-1) for g in grids])


def process_panel(mesh, sol, load: LoadCase, panel_id: str, cfg: ExperimentConfig, design: int,
                  refine=False):
    """Oracle targets, ESL-analytic stresses and graph for one global panel."""
    p = mesh.panels[panel_id]
    sec = p.section
    loads = panel_local_loads(mesh, load, panel_id)
    edges = extract_edge_kinematics(mesh, sol, panel_id)
    boundary = recover_boundary(edges, sec)
    nb, nw, nf, nl = cfg.oracle_density
    pm = build_panel_mesh(sec, nb, nw, nf, nl)
    accel = p.frame @ np.array([0.0, 0.0, -GRAVITY]) if load.gravity else None
    psol = solve_panel(pm, boundary, loads, accel)
    targets = {f: _grids_to_block(field_grids(psol, f)) for f in TARGET_FIELDS}
    resultants = panel_resultant_field(mesh, sol, panel_id)
    esl = {bc: _grids_to_block(esl_stress_field(resultants, sec, loads, BcAssumption(bc)))
           for bc in BCS}
    graph = encode_panel(sec, loads, boundary)
    rec = PanelRecord(f"d{design:05d}/{panel_id}", design, panel_id, cfg.case, sec, loads,
                      graph, targets, esl,
                      {k: boundary.records[f"plate_{k}"].values for k in ("x0", "x1", "y0", "y1")})
    change = refinement_change(sec, boundary, loads, nl) if refine else None
    return rec, change


def process_design(args):
    """All panel records of one design; failures are returned as skip entries."""
    cfg, design, refine = args
    records, skips, checks = [], [], []
    try:
        beam, load = sample_design(cfg, design)
        mesh = build_box_beam(beam, cfg.global_density)
        sol = assemble_and_solve(mesh, load)
    except (SolverError, MeshError, SectionError, ValueError) as exc:
        return records, [{"design": design, "panel": None, "reason": f"{type(exc).__name__}: {exc}"}], checks
    for pid in sorted(mesh.panels):
        try:
            rec, change = process_panel(mesh, sol, load, pid, cfg, design,
                                        refine=refine and not checks)
        except (SolverError, SectionError, GraphError, ValueError) as exc:
            skips.append({"design": design, "panel": pid, "reason": f"{type(exc).__name__}: {exc}"})
            continue
        records.append(rec)
        if change is not None:
            checks.append({"record": rec.record_id, "interior_change": float(change[0]),
                           "full_change": float(change[1]),
                           "gate_passed": bool(change[0] < REFINEMENT_GATE)})
            if change[0] >= REFINEMENT_GATE:
                log.warning("refinement gate exceeded on %s: interior peak changed %.2f%%",
                            rec.record_id, 100 * change[0])
    return records, skips, checks


def worker_count():
    try:
        n = int(os.environ.get("HULLKIT_THREADS", "1"))
    except ValueError as exc:
        raise ConfigError("HULLKIT_THREADS must be an integer") from exc
    return max(1, n)


def _map_designs(jobs):
    n = worker_count()
    if n == 1 or len(jobs) == 1:
        return map(process_design, jobs)
    ex = ProcessPoolExecutor(max_workers=n)
    try:
        return list(ex.map(process_design, jobs))   # ordered by design id
    finally:
        ex.shutdown()


# ---------------------------------------------------------------- dataset files

def write_dataset(path, records):
    chunks = [DATASET_MAGIC, bytes([DATASET_VERSION]), struct.pack("<Q", len(records))]
    for r in records:
        b = r.to_bytes()
        chunks.append(struct.pack("<Q", len(b)))
        chunks.append(b)
    serialization.write_atomic(path, b"".join(chunks))


def read_dataset(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != DATASET_MAGIC:
        raise serialization.SchemaError(f"{path}: not a hullkit dataset")
    if data[8] != DATASET_VERSION:
        raise serialization.SchemaError(
            f"{path}: dataset version {data[8]} but this build reads version {DATASET_VERSION}")
    (n,) = struct.unpack("<Q", data[9:17])
    pos, out = 17, []
    for _ in range(n):
        (m,) = struct.unpack("<Q", data[pos:pos + 8])
        out.append(PanelRecord.from_bytes(data[pos + 8:pos + 8 + m]))
        pos += 8 + m
    return out


def gen_dataset(cfg: ExperimentConfig, out_dir=None, progress=False):
    """Generate records for ``cfg.samples`` designs; writes dataset.bin and manifest.json.

    Returns (records, manifest)."""
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(cfg, d, d < cfg.refinement_checks) for d in range(cfg.samples)]
    records, skips, checks = [], [], []
    for d, (recs, sk, ch) in enumerate(_map_designs(jobs)):
        records.extend(recs)
        skips.extend(sk)
        checks.extend(ch)
        for s in sk:
            log.warning("skipped design %s panel %s: %s", s["design"], s["panel"], s["reason"])
        if progress:
            print(f"design {d + 1}/{cfg.samples}: {len(recs)} panels", flush=True)
    write_dataset(os.path.join(out_dir, "dataset.bin"), records)
    if cfg.jsonl:
        with open(os.path.join(out_dir, "dataset.jsonl"), "w") as fh:
            for r in records:
                fh.write(r.to_json() + "\n")
    attempted = len(records) + sum(1 for s in skips if s["panel"] is not None)
    manifest = {
        "format": {"dataset_version": DATASET_VERSION, "magic": DATASET_MAGIC.decode()},
        "config": cfg.to_dict(),
        "provenance": {"table1_case": cfg.case, "table1_ranges": TABLE1[cfg.case],
                       "paper_faithful": cfg.paper_faithful,
                       "scaled": "desk-scale sample counts, not the full-size experiment"},
        "designs": cfg.samples,
        "records": len(records),
        "skipped": skips,
        "skip_rate": (len(skips) / max(attempted + sum(1 for s in skips if s["panel"] is None), 1)),
        "refinement_checks": checks,
        "record_ids": [r.record_id for r in records],
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return records, manifest


def load_manifest(data_dir):
    with open(os.path.join(data_dir, "manifest.json")) as fh:
        m = json.load(fh)
    v = m.get("format", {}).get("dataset_version")
    if v != DATASET_VERSION:
        raise serialization.SchemaError(
            f"manifest dataset version {v} but this build reads version {DATASET_VERSION}")
    return m


# ---------------------------------------------------------------- splits, training

def split_by_design(records, fractions=(0.8, 0.1, 0.1), seed=0):
    """Train / validation / test lists with every design in exactly one split."""
    designs = sorted({r.design for r in records})
    perm = np.random.default_rng(seed).permutation(len(designs))
    n = len(designs)
    n_tr = int(round(fractions[0] * n))
    n_va = int(round(fractions[1] * n))
    if n >= 3:
        n_tr = min(max(n_tr, 1), n - 2)
        n_va = min(max(n_va, 1), n - n_tr - 1)
    part = {}
    for rank, i in enumerate(perm):
        part[designs[i]] = 0 if rank < n_tr else (1 if rank < n_tr + n_va else 2)
    out = ([], [], [])
    for r in records:
        out[part[r.design]].append(r)
    return out


def samples_of(records, field_name):
    return [(r.graph, r.targets[field_name]) for r in records]


def train_field(train_records, val_records, field_name, config: HgtConfig, verbose=False):
    params, tlog = train(samples_of(train_records, field_name), config,
                         samples_of(val_records, field_name) or None, verbose=verbose)
    return params, tlog


# ---------------------------------------------------------------- evaluation

@dataclass
class ErrorReport:
    field: str
    unit: str
    record_ids: list
    hgt_errors: list            # per panel: (n_strips, 500) prediction - oracle, physical units
    esl_errors: list            # per panel ESL-analytic - oracle (von Mises only), else empty
    reference_errors: list = field(default_factory=list)   # framework vs global reference

    @staticmethod
    def _rmse(errs):
        return [float(np.sqrt(np.mean(e ** 2))) for e in errs]

    @staticmethod
    def _agg(errs):
        if not errs:
            return math.nan
        sq = sum(float(np.sum(e ** 2)) for e in errs)
        return math.sqrt(sq / sum(e.size for e in errs))

    @property
    def scale(self):
        return UNITS[self.field][1]

    def per_panel(self):
        """Rows (record id, HGT RMSE, ESL RMSE) in report units."""
        h = self._rmse(self.hgt_errors)
        e = self._rmse(self.esl_errors) if self.esl_errors else [math.nan] * len(h)
        return [(rid, a * self.scale, b * self.scale) for rid, a, b in zip(self.record_ids, h, e)]

    @property
    def hgt_rmse(self):
        return self._agg(self.hgt_errors) * self.scale

    @property
    def esl_rmse(self):
        return self._agg(self.esl_errors) * self.scale

    @property
    def framework_rmse(self):
        return self._agg(self.reference_errors) * self.scale

    def summary(self):
        return {"field": self.field, "unit": self.unit, "panels": len(self.record_ids),
                "hgt_rmse": self.hgt_rmse, "esl_ff_rmse": self.esl_rmse,
                "framework_rmse": self.framework_rmse if self.reference_errors else None}

    def write(self, report_dir):
        os.makedirs(report_dir, exist_ok=True)
        with open(os.path.join(report_dir, f"panels_{self.field}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["record", f"hgt_rmse_{self.unit}", f"esl_ff_rmse_{self.unit}"])
            for rid, a, b in self.per_panel():
                w.writerow([rid, f"{a:.9g}", f"{b:.9g}"])
        arrays = {f"hgt/{i:05d}": e for i, e in enumerate(self.hgt_errors)}
        arrays.update({f"esl/{i:05d}": e for i, e in enumerate(self.esl_errors)})
        serialization.write_atomic(
            os.path.join(report_dir, f"errors_{self.field}.bin"),
            serialization.pack(b"HKERRORS", 1, {"records": self.record_ids, "field": self.field},
                               arrays))
        with open(os.path.join(report_dir, f"summary_{self.field}.json"), "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        rows = self.per_panel()
        svg.bar_chart(os.path.join(report_dir, f"panels_{self.field}.svg"),
                      [r[0] for r in rows], {"HGT": [r[1] for r in rows],
                                             "ESL (FF)": [r[2] for r in rows]},
                      ylabel=f"RMSE ({self.unit})", title=f"Per-panel RMSE, {self.field}")


def predict_records(params, records, batch_size=64):
    out = []
    for i in range(0, len(records), batch_size):
        chunk = records[i:i + batch_size]
        p = predict(batch_graphs([r.graph for r in chunk]), params)
        k = 0
        for r in chunk:
            n = r.graph.num_nodes(GEOMETRY)
            out.append(p[k:k + n])
            k += n
    return out


def evaluate(params, records, field_name="vm", predictions=None) -> ErrorReport:
    """Surrogate-vs-oracle and ESL-analytic(FF)-vs-oracle errors on ``records``.

    ``predictions`` overrides the model output (one block per record)."""
    preds = predictions if predictions is not None else predict_records(params, records)
    hgt = [np.asarray(p, float) - r.targets[field_name] for p, r in zip(preds, records)]
    esl = [r.esl["ff"] - r.targets[field_name] for r in records] if field_name == "vm" else []
    return ErrorReport(field_name, UNITS[field_name][0], [r.record_id for r in records], hgt, esl)


# path definitions on the 10 x 50 plate grids
def _column_interp(grid, x_frac):
    c = x_frac * (GRID_COLS - 1)
    i = min(int(np.floor(c)), GRID_COLS - 2)
    w = c - i
    return (1 - w) * grid[:, i] + w * grid[:, i + 1]


def plate_paths(block, section: PanelSection):
    """Plate-centre transverse (x = L/2), plate-offset transverse (x = 0.1 L) and
    plate-centre longitudinal (mid-row of the middle bay) paths.

    Returns {name: (coordinate, values)}."""
    strips = panel_strips(section)
    bays = [k for k, s in enumerate(strips) if s.kind == BAY]
    out = {}
    for name, xf in (("plate_center_1", 0.5), ("plate_offset", 0.1)):
        ys, vs = [], []
        for k in bays:
            g = block[k].reshape(GRID_ROWS, GRID_COLS)
            s = strips[k]
            y = np.linspace(s.p0[0], s.p1[0], GRID_ROWS)
            ys.append(y if not ys else y[1:])
            v = _column_interp(g, xf)
            vs.append(v if not vs else v[1:])
        out[name] = (np.concatenate(ys), np.concatenate(vs))
    mid = bays[len(bays) // 2]
    g = block[mid].reshape(GRID_ROWS, GRID_COLS)
    out["plate_center_2"] = (np.linspace(0.0, section.span, GRID_COLS),
                             0.5 * (g[GRID_ROWS // 2 - 1] + g[GRID_ROWS // 2]))
    return out


def write_path_extracts(report_dir, record, blocks: dict, unit_scale=1e-6, unit="MPa"):
    """CSV + SVG of the three plate paths for one record; ``blocks`` maps a label
    (e.g. 'oracle', 'hgt', 'esl_ff') to an (n_strips, 500) block."""
    os.makedirs(report_dir, exist_ok=True)
    stem = record.record_id.replace("/", "_")
    paths = {lbl: plate_paths(b, record.section) for lbl, b in blocks.items()}
    labels = list(blocks)
    for pname in ("plate_center_1", "plate_center_2", "plate_offset"):
        coord = paths[labels[0]][pname][0]
        with open(os.path.join(report_dir, f"{stem}_{pname}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s_m", *(f"{lbl}_{unit}" for lbl in labels)])
            for i, s in enumerate(coord):
                w.writerow([f"{s:.6g}", *(f"{paths[l][pname][1][i] * unit_scale:.9g}" for l in labels)])
        svg.line_plot(os.path.join(report_dir, f"{stem}_{pname}.svg"),
                      {l: (coord, paths[l][pname][1] * unit_scale) for l in labels},
                      xlabel="path coordinate (m)", ylabel=unit, title=f"{record.record_id} {pname}")


# ---------------------------------------------------------------- studies

def run_appendix_b_study(train_pool, val_records, test_records, sizes, config: HgtConfig,
                         field_name="vm", verbose=False):
    """Test RMSE for models trained on the first ``size`` panels of ``train_pool``.

    Every model uses the same HgtConfig.  Returns rows (size, test RMSE, best epoch)."""
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ConfigError("at least one training-set size is required")
    if max(sizes) > len(train_pool):
        raise ConfigError(f"largest size {max(sizes)} exceeds the {len(train_pool)} training panels")
    if any(s < 1 for s in sizes):
        raise ConfigError("training-set sizes must be positive")
    rows = []
    for s in sizes:
        params, tlog = train_field(train_pool[:s], val_records, field_name, config, verbose)
        rep = evaluate(params, test_records, field_name)
        rows.append((s, rep.hgt_rmse, tlog.best_epoch))
    return rows


def trend_is_monotone(rmse, margin=0.10):
    """Non-increasing within a relative noise margin."""
    return all(b <= a * (1 + margin) for a, b in zip(rmse[:-1], rmse[1:]))


APPENDIX_A_PANELS = (
    (0.010, 0.005, 0.100, 0.005, 0.050, 5),
    (0.010, 0.020, 0.200, 0.020, 0.100, 5),
    (0.020, 0.005, 0.100, 0.005, 0.050, 5),
    (0.010, 0.005, 0.100, 0.005, 0.050, 2),
)


def appendix_a_study(pressure=2.22e5, global_density=4, oracle_density=(10, 6, 4, 24)):
    """ESL-analytic von Mises under FF / SS / GF against the panel oracle on the
    plate-centre transverse path of the middle top panel of a single-cell beam.

    Returns one dict per panel with path RMSE (Pa) per BC plus the path arrays."""
    rows = []
    cfg = ExperimentConfig(samples=1, global_density=global_density,
                           oracle_density=oracle_density, paper_faithful=False)
    for i, dims in enumerate(APPENDIX_A_PANELS):
        base = BoxBeamConfig()
        top = PanelSection(*dims, base.bay_length, base.width, STEEL)
        beam = replace(base, sections={**base.sections, "top": top})
        load = LoadCase(UNIFORM_PRESSURE, top_pressure=pressure)
        mesh = build_box_beam(beam, global_density)
        sol = assemble_and_solve(mesh, load)
        rec, _ = process_panel(mesh, sol, load, "top_b1", cfg, i)
        oracle = plate_paths(rec.targets["vm"], rec.section)["plate_center_1"]
        row = {"panel": i + 1, "dims": dims, "y": oracle[0], "oracle": oracle[1]}
        for bc in BCS:
            path = plate_paths(rec.esl[bc], rec.section)["plate_center_1"][1]
            row[bc] = path
            row[f"rmse_{bc}"] = float(np.sqrt(np.mean((path - oracle[1]) ** 2)))
        rows.append(row)
    return rows


def save_model(path, params, field_name, tlog=None, data_manifest=None):
    extra = {"field": field_name, "dataset_version": DATASET_VERSION}
    if tlog is not None:
        extra["best_epoch"] = tlog.best_epoch
    if data_manifest is not None:
        extra["data_seed"] = data_manifest["config"]["seed"]
    ckpt.save(path, params, extra)


def load_model(path):
    params, extra = ckpt.load(path)
    v = extra.get("dataset_version")
    if v != DATASET_VERSION:
        raise serialization.SchemaError(
            f"model trained on dataset version {v} but this build reads version {DATASET_VERSION}")
    return params, extra
