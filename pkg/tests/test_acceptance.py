"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a PASS/FAIL verdict (printed at the end of the session) before
asserting, so a failing criterion is reported rather than hidden.  Criteria 7-10
generate data, train surrogates and take tens of minutes on one CPU.
"""
import json
import os
import time

import numpy as np
import pytest

from hullkit import cli
from hullkit import pipeline as pl
from hullkit.boundary import EdgeKinematics, recover_boundary
from hullkit.cross_section import STEEL, PanelSection, abd_from_section
from hullkit.graph import (
    BOUNDARY, FEATURE_DIMS, GEOMETRY, LOADING, PLATE_EDGE, GraphError, HeteroGraph,
    pack_targets, unpack_targets,
)
from hullkit.hgt import HgtConfig, Normalizer, batch_graphs, forward, init_params, train
from hullkit.hgt.gradcheck import gradient_check
from hullkit.hgt.train import relations_of
from hullkit.localization import BcAssumption, LocalLoad, local_moment
from hullkit.shell import SolverError, solve_linear
from hullkit.strips import FieldGrid

from tests.helpers import square_plate
from tests.oracles import beam_moment_fd, navier_ss_plate_center, ritz_clamped_plate_center
from tests.test_cross_section import numeric_abd
from tests.test_graph import fig4_layout, panel_graph
from tests.test_shell import _edge_nodes, plate_deflection
from tests.verdicts import record

pytestmark = pytest.mark.acceptance

# desk-scale study settings (case 1, seed 0); designs are indexed so the
# criterion-7 data is a subset of the criterion-8 data
STUDY_SEED = 0
TRAIN_DESIGNS_7 = range(0, 17)        # 204 panels, first 200 used
VAL_DESIGNS = range(17, 19)
TEST_DESIGNS = range(19, 22)
EXTRA_TRAIN_DESIGNS = range(22, 139)  # with TRAIN_DESIGNS_7: 1608 panels
EPOCHS_7 = 500
EPOCHS_8 = 150
SURROGATE = dict(layers=2, heads=4, hidden=64, learning_rate=1e-3, batch_size=64, seed=0)


def study_config():
    return pl.ExperimentConfig(case=1, samples=1, seed=STUDY_SEED, refinement_checks=0)


_DESIGN_CACHE = {}


def design_records(designs):
    """Records of the given design ids (generated once per session), with generation time."""
    cfg = study_config()
    todo = [d for d in designs if d not in _DESIGN_CACHE]
    t0 = time.perf_counter()
    for d in todo:
        recs, skips, _ = pl.process_design((cfg, d, False))
        _DESIGN_CACHE[d] = (recs, skips)
    elapsed = time.perf_counter() - t0
    recs = [r for d in designs for r in _DESIGN_CACHE[d][0]]
    skips = [s for d in designs for s in _DESIGN_CACHE[d][1]]
    return recs, skips, elapsed


# ------------------------------------------------------------------ 1

def sample_table1_section(rng):
    r = pl.TABLE1[1]
    dims = [rng.uniform(*r[k]) for k in ("plate_thickness", "web_thickness", "web_height",
                                         "flange_thickness", "flange_width")]
    width = rng.uniform(1.0, 2.4)
    hi = pl._max_count(width, dims[4], 7)
    return PanelSection(*dims, int(rng.integers(2, hi + 1)), 2.0, width, STEEL)


def test_criterion_01_stiffness_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        sec = sample_table1_section(rng)
        abd = abd_from_section(sec)
        for ours, ref in zip((abd.A, abd.Bc, abd.D), numeric_abd(sec)):
            worst = max(worst, np.abs(ours - ref).max() / np.abs(ref).max())
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 5.0
    record(1, ok, f"max relative ABD error {worst:.2e} over 100 sections, {dt:.2f} s")
    assert ok


# ------------------------------------------------------------------ 2

def moment_cases(rng, n=10):
    out = {"uniform": [], "trapezoidal": [], "triangular": []}
    for _ in range(n):
        l = rng.uniform(0.2, 0.9)
        out["uniform"].append(LocalLoad.uniform(rng.uniform(5e4, 4e5), l))
        out["trapezoidal"].append(LocalLoad.trapezoid(rng.uniform(0, 4e5), rng.uniform(0, 4e5), l))
        out["triangular"].append(LocalLoad.triangle(rng.uniform(5e4, 4e5), rng.uniform(0, 0.9) * l, l))
    return out


def test_criterion_02_closed_form_moments(tmp_path):
    t0 = time.perf_counter()
    cases = moment_cases(np.random.default_rng(202))
    worst_ff = 0.0
    report = []
    for kind, loads in cases.items():
        for i, load in enumerate(loads):
            for bc in BcAssumption:
                y, ref = beam_moment_fd(load.intensity, load.l, bc.value)
                dev = np.abs(local_moment(load, bc, y) - ref).max() / np.abs(ref).max()
                if bc is BcAssumption.FF:
                    worst_ff = max(worst_ff, dev)
                elif dev > 1e-6:
                    report.append({"bc": bc.value, "shape": kind, "case": i, "l": load.l,
                                   "relative_deviation": float(dev)})
    path = tmp_path / "moment_discrepancies.json"
    path.write_text(json.dumps(report, indent=2))
    dt = time.perf_counter() - t0
    flagged = sorted({(r["bc"], r["shape"]) for r in report})
    summary = ", ".join(f"{bc}/{shape}" for bc, shape in flagged) or "none"
    print(f"SS/GF closed forms disagreeing with the clamped/pinned/guided beam oracle: {summary}")
    for bc, shape in flagged:
        devs = [r["relative_deviation"] for r in report if (r["bc"], r["shape"]) == (bc, shape)]
        print(f"  {bc} {shape}: {len(devs)}/10 cases, max deviation {max(devs):.3g} of peak |M|")
    ok = worst_ff <= 1e-6 and path.exists() and dt < 10.0
    record(2, ok, f"FF max deviation {worst_ff:.2e} of peak |M| over 30 cases; "
                  f"SS/GF discrepancy report lists {len(report)} cases ({summary}); {dt:.1f} s")
    assert ok


# ------------------------------------------------------------------ 3

def test_criterion_03_shell_kernel():
    t0 = time.perf_counter()
    # patch test on a distorted mesh: linear membrane and constant curvature fields
    m = square_plate(1.0, 3, 0.01, distort=0.3)
    x, y = m.nodes[:, 0], m.nodes[:, 1]
    exact = np.zeros(m.n_dof)
    exact[0::6] = 1e-4 * x + 2e-4 * y
    exact[1::6] = -3e-4 * x + 0.5e-4 * y
    exact[2::6] = -1e-3 * x**2 / 2 - 2e-3 * y**2 / 2
    exact[4::6] = 1e-3 * x
    exact[3::6] = -2e-3 * y
    exact[5::6] = -2.5e-4
    fixed = (6 * _edge_nodes(m, 1.0)[:, None] + np.arange(6)).ravel()
    sol = solve_linear(m.stiffness_matrix(), np.zeros(m.n_dof), fixed, exact, nodes=m.nodes)
    patch = np.abs(sol.d - exact).max() / np.abs(exact).max()
    _, ss, _ = plate_deflection("ss", n=16)
    _, cc, _ = plate_deflection("cc", n=16)
    ss_err = abs(ss / navier_ss_plate_center() - 1)
    cc_err = abs(cc / ritz_clamped_plate_center() - 1)
    free = square_plate(1.0, 2, 0.01)
    f = np.zeros(free.n_dof)
    f[2] = 1.0
    try:
        solve_linear(free.stiffness_matrix(), f, [], nodes=free.nodes)
        rigid = False
    except SolverError:
        rigid = True
    dt = time.perf_counter() - t0
    ok = patch <= 1e-8 and ss_err <= 0.02 and cc_err <= 0.02 and rigid and dt < 60
    record(3, ok, f"patch {patch:.1e}, SS plate {100 * ss_err:.2f}%, clamped plate "
                  f"{100 * cc_err:.2f}%, rigid-body modes detected: {rigid}, {dt:.1f} s")
    assert ok


# ------------------------------------------------------------------ 4

def test_criterion_04_boundary_invariants():
    rng = np.random.default_rng(404)
    scale = np.array([1e-3, 1e-3, 1e-3, 1e-2, 1e-2, 1e-2])
    cont = u_only = lin = 0.0
    for _ in range(1000):
        sec = sample_table1_section(rng)
        e = EdgeKinematics.clamped(sec.span, sec.width)
        for k in e.values:
            e.values[k] = rng.normal(size=(60, 6)) * scale
        b = recover_boundary(e, sec)
        alpha = rng.uniform(-3, 3)
        b2 = recover_boundary(e.scaled(alpha), sec)
        for end in ("x0", "x1"):
            s, vals = e.stations[end], e.values[end]
            for k, yk in enumerate(sec.stiffener_positions()):
                web = b.records[f"web{k}_{end}"]
                cont = max(cont, abs(web.values[0, 0] - np.interp(yk, s, vals[:, 0])))
                a = np.array([np.interp(yk, s, vals[:, j]) for j in range(6)])
                u_only = max(u_only, np.abs(web.values[:, 1:] - a[1:]).max())
                fl = b.records[f"flange{k}_{end}"]
                ya = fl.points[:, 1]
                a = np.column_stack([np.interp(ya, s, vals[:, j]) for j in range(6)])
                u_only = max(u_only, np.abs(fl.values[:, 1:] - a[:, 1:]).max())
        for name, r in b.records.items():
            ref = alpha * r.values
            lin = max(lin, np.abs(b2.records[name].values - ref).max() / np.abs(r.values).max())
    ok = cont == 0.0 and u_only == 0.0 and lin <= 1e-12
    record(4, ok, f"1000 trials: continuity gap {cont:.1e}, non-u change {u_only:.1e}, "
                  f"linearity {lin:.1e}")
    assert ok


# ------------------------------------------------------------------ 5

def test_criterion_05_graph_encoding():
    counts = fig4_layout().counts()
    rng = np.random.default_rng(505)
    grids = [FieldGrid(rng.normal(size=(10, 50)) * 1e8, f"s{i}") for i in range(7)]
    back = unpack_targets(pack_targets(grids, 7), [g.strip for g in grids])
    lossless = all(np.array_equal(a.values, b.values) for a, b in zip(grids, back))
    _, g = panel_graph(4)
    dims_ok = all(g.x[t].shape[1] == FEATURE_DIMS[t] for t in FEATURE_DIMS)
    dims_ok &= (FEATURE_DIMS[BOUNDARY], FEATURE_DIMS[GEOMETRY]) == (360, 10)
    dims_ok &= pack_targets(grids, 7).shape[1] == 500
    rejected = 0
    for t in (BOUNDARY, GEOMETRY, LOADING, PLATE_EDGE):
        x = dict(g.x)
        x[t] = np.zeros((x[t].shape[0], x[t].shape[1] + 1))
        try:
            HeteroGraph(x, g.edges, g.strip_names)
        except GraphError:
            rejected += 1
    ok = counts == (3, 10, 2, 6) and lossless and dims_ok and rejected == 4
    record(5, ok, f"Fig. 4 counts {counts}, target round trip lossless: {lossless}, "
                  f"dims 360/10/500 enforced: {dims_ok and rejected == 4}")
    assert ok


# ------------------------------------------------------------------ 6

def test_criterion_06_hgt_correctness():
    t0 = time.perf_counter()
    graphs = [panel_graph(3)[1], panel_graph(2, alpha=1.7)[1]]
    small = HgtConfig(hidden=8, heads=2, layers=2, batch_size=2)
    p = init_params(small, relations_of(graphs))
    p.norm = Normalizer.fit(graphs)
    g = batch_graphs(graphs)
    res = forward(g, p, keep_attention=True)
    att = 0.0
    for layer in res.attention:
        for t, (alpha, dst) in layer.items():
            sums = np.zeros((g.num_nodes(t), alpha.shape[1]))
            np.add.at(sums, dst, alpha)
            att = max(att, np.abs(sums[np.unique(dst)] - 1).max())
    equi = 0.0
    for training in (False, True):
        base = forward(graphs[0], p, training=training).pred.data
        for t in (GEOMETRY, PLATE_EDGE, BOUNDARY, LOADING):
            perm = np.random.default_rng(6).permutation(graphs[0].num_nodes(t))
            out = forward(graphs[0].permuted(t, perm), p, training=training).pred.data
            expect = base[perm] if t == GEOMETRY else base
            equi = max(equi, np.abs(out - expect).max() / np.abs(base).max())
    pred = forward(g, p, training=True).pred.data
    target = pred + 0.1 * np.random.default_rng(0).normal(size=pred.shape)
    fd = gradient_check(g, p, target, per_family=20)
    # four-sample overfit with the default architecture
    rng = np.random.default_rng(66)
    four = [panel_graph(c, alpha=a)[1] for c, a in ((2, 1.0), (3, 0.6), (4, 1.3), (5, 0.9))]
    data = [(gr, 100e6 + 50e6 * rng.normal(size=(gr.num_nodes(GEOMETRY), 500))) for gr in four]
    std = np.concatenate([y for _, y in data]).std()
    _, tlog = train(data, HgtConfig(batch_size=4, max_epochs=2000, seed=0))
    overfit = tlog.train_rmse[-1] / std
    dt = time.perf_counter() - t0
    ok = (att <= 1e-6 and equi <= 1e-12 and max(fd.values()) < 1e-5 and overfit < 1e-3
          and dt < 600)
    record(6, ok, f"attention {att:.1e}, equivariance {equi:.1e}, worst FD family "
                  f"{max(fd, key=fd.get)} {max(fd.values()):.1e} ({len(fd)} families), "
                  f"overfit RMSE/std {overfit:.1e} after 2000 steps, {dt:.0f} s")
    assert ok


# ------------------------------------------------------------------ 7

def test_criterion_07_surrogate_beats_esl():
    t0 = time.perf_counter()
    train_recs, s1, _ = design_records(TRAIN_DESIGNS_7)
    val_recs, s2, _ = design_records(VAL_DESIGNS)
    test_recs, s3, _ = design_records(TEST_DESIGNS)
    train_recs, test_recs = train_recs[:200], test_recs[:25]
    assert len(train_recs) == 200 and len(test_recs) == 25
    cfg = HgtConfig(max_epochs=EPOCHS_7, **SURROGATE)
    params, tlog = pl.train_field(train_recs, val_recs, "vm", cfg)
    rep = pl.evaluate(params, test_recs, "vm")
    dt = time.perf_counter() - t0
    factor = rep.esl_rmse / rep.hgt_rmse
    skipped = len(s1) + len(s2) + len(s3)
    ok = rep.hgt_rmse < rep.esl_rmse and factor >= 2.0 and dt < 7200
    record(7, ok, f"test von Mises RMSE: surrogate {rep.hgt_rmse:.2f} MPa vs ESL-FF "
                  f"{rep.esl_rmse:.2f} MPa, factor {factor:.2f} (target 2); best epoch "
                  f"{tlog.best_epoch}/{EPOCHS_7}; {skipped} skipped; {dt / 60:.1f} min")
    assert ok


# ------------------------------------------------------------------ 8

def test_criterion_08_dataset_size_trend():
    pool, s1, _ = design_records(list(TRAIN_DESIGNS_7) + list(EXTRA_TRAIN_DESIGNS))
    val_recs, _, _ = design_records(VAL_DESIGNS)
    test_recs, _, _ = design_records(TEST_DESIGNS)
    total = len(pool) + len(val_recs) + len(test_recs) + len(s1)
    skip_rate = len(s1) / max(total, 1)
    # shuffle once so every size draws from the same design mix
    order = np.random.default_rng(8).permutation(len(pool))
    pool = [pool[i] for i in order]
    cfg = HgtConfig(max_epochs=EPOCHS_8, **SURROGATE)
    t0 = time.perf_counter()
    rows = pl.run_appendix_b_study(pool, val_recs, test_recs, [100, 400, 1600], cfg, "vm")
    dt = time.perf_counter() - t0
    rmse = [r[1] for r in rows]
    ok = pl.trend_is_monotone(rmse, 0.10) and skip_rate < 0.01
    record(8, ok, "test RMSE " + ", ".join(f"{s}: {e:.2f} MPa" for s, e, _ in rows)
           + f"; skip rate {100 * skip_rate:.2f}%; training {dt / 60:.1f} min")
    assert ok


# ------------------------------------------------------------------ 9

def test_criterion_09_appendix_a_ordering():
    rows = pl.appendix_a_study()
    best = [min(pl.BCS, key=lambda bc: r[f"rmse_{bc}"]) for r in rows]
    detail = "; ".join(f"panel {r['panel']}: " + "/".join(f"{r[f'rmse_{bc}'] * 1e-6:.1f}"
                                                          for bc in pl.BCS) for r in rows)
    ok = all(b == "ff" for b in best)
    record(9, ok, f"plate-centre path RMSE FF/SS/GF (MPa) {detail}")
    assert ok


# ------------------------------------------------------------------ 10

def _run_chain(root, monkeypatch):
    root.mkdir()
    monkeypatch.setenv("HULLKIT_THREADS", "1")
    cfg = pl.ExperimentConfig(case=1, samples=3, seed=42, refinement_checks=0)
    (root / "c.json").write_text(json.dumps(cfg.to_dict()))
    data, rep = root / "data", root / "report"
    assert cli.main(["gen", "--config", str(root / "c.json"), "--out", str(data)]) == 0
    assert cli.main(["train", "--data", str(data), "--target", "vm", "--epochs", "5",
                     "--hidden", "16", "--heads", "2"]) == 0
    assert cli.main(["eval", "--model", str(data / "model_vm.ckpt"), "--data", str(data),
                     "--report", str(rep)]) == 0
    files = {}
    for base, _, names in os.walk(root):
        for n in names:
            p = os.path.join(base, n)
            files[os.path.relpath(p, root)] = open(p, "rb").read()
    return files


def test_criterion_10_determinism(tmp_path, monkeypatch):
    a = _run_chain(tmp_path / "a", monkeypatch)
    b = _run_chain(tmp_path / "b", monkeypatch)
    same = sorted(a) == sorted(b) and all(a[k] == b[k] for k in a)
    differ = [k for k in a if a.get(k) != b.get(k)]
    record(10, same, f"{len(a)} artifacts from gen -> train -> eval compared byte for byte"
                     + (f"; differing: {differ}" if differ else ""))
    assert same
