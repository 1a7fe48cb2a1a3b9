"""Command-line entry point: ``hullkit {gen,train,eval,esl-stress,study-b}``.

Exit codes: 0 success, 2 configuration error, 3 solver or training failure,
4 schema mismatch.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import pipeline as pl
from . import svg
from .cross_section import PanelSection, SectionError, StrainState, abd_from_section
from .hgt import HgtConfig, ModelError, TrainingDiverged
from .localization import BcAssumption, LocalLoad, path_profile
from .serialization import SchemaError
from .shell import SolverError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SCHEMA = 0, 2, 3, 4


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _hgt_config(args, seed):
    return HgtConfig(layers=args.layers, heads=args.heads, hidden=args.hidden,
                     learning_rate=args.lr, batch_size=args.batch, max_epochs=args.epochs,
                     seed=seed if args.seed is None else args.seed)


def _add_hgt_args(p, epochs=500):
    p.add_argument("--epochs", type=int, default=epochs)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=None, help="model seed (default: dataset seed)")


def cmd_gen(args):
    cfg = pl.ExperimentConfig.from_dict(_read_json(args.config)) if args.config else \
        pl.ExperimentConfig()
    over = {}
    if args.samples is not None:
        over["samples"] = args.samples
    if args.seed is not None:
        over["seed"] = args.seed
    if args.jsonl:
        over["jsonl"] = True
    cfg = pl.ExperimentConfig.from_dict({**cfg.to_dict(), **over})
    recs, man = pl.gen_dataset(cfg, args.out, progress=args.verbose)
    print(f"{len(recs)} panel records from {cfg.samples} designs -> {args.out} "
          f"({len(man['skipped'])} skipped)")
    return EXIT_OK


def _load_data(data_dir):
    man = pl.load_manifest(data_dir)
    recs = pl.read_dataset(os.path.join(data_dir, "dataset.bin"))
    return man, recs


def cmd_train(args):
    man, recs = _load_data(args.data)
    seed = man["config"]["seed"]
    tr, va, _ = pl.split_by_design(recs, seed=seed)
    cfg = _hgt_config(args, seed)
    params, tlog = pl.train_field(tr, va, args.target, cfg, verbose=args.verbose)
    out = args.out or os.path.join(args.data, f"model_{args.target}.ckpt")
    pl.save_model(out, params, args.target, tlog, man)
    tlog.write_csv(os.path.splitext(out)[0] + "_log.csv", timing=args.timing)
    print(f"trained {args.target} on {len(tr)} panels; best validation RMSE "
          f"{tlog.best_val:.6g} at epoch {tlog.best_epoch} -> {out}")
    return EXIT_OK


def cmd_eval(args):
    params, extra = pl.load_model(args.model)
    man, recs = _load_data(args.data)
    _, _, te = pl.split_by_design(recs, seed=man["config"]["seed"])
    if not te:
        raise pl.ConfigError(f"test split is empty ({len({r.design for r in recs})} designs; "
                             "at least 3 are needed)")
    field_name = extra["field"]
    rep = pl.evaluate(params, te, field_name)
    rep.write(args.report)
    preds = pl.predict_records(params, te[:args.paths])
    unit, scale = pl.UNITS[field_name]
    for r, p in zip(te[:args.paths], preds):
        blocks = {"oracle": r.targets[field_name], "hgt": p}
        if field_name == "vm":
            blocks["esl_ff"] = r.esl["ff"]
        pl.write_path_extracts(os.path.join(args.report, "paths"), r, blocks, scale, unit)
    s = rep.summary()
    print(f"{field_name}: HGT RMSE {s['hgt_rmse']:.6g} {unit}, "
          f"ESL (FF) RMSE {s['esl_ff_rmse']:.6g} {unit} over {s['panels']} test panels")
    return EXIT_OK


def cmd_esl_stress(args):
    section = PanelSection.from_dict(_read_json(args.panel))
    ld = _read_json(args.load)
    bays = section.stiffener_count + 1
    if isinstance(ld, list):
        loads = [LocalLoad.from_dict(d) if d else None for d in ld]
    else:
        loads = [LocalLoad.from_dict({**ld, "l": section.spacing})] * bays
    if len(loads) != bays:
        raise pl.ConfigError(f"expected {bays} bay loads, got {len(loads)}")
    N, M = np.zeros(3), np.zeros(3)
    if args.resultants:
        r = _read_json(args.resultants)
        N, M = np.asarray(r.get("N", N), float), np.asarray(r.get("M", M), float)
    bc = BcAssumption(args.bc)
    rows = esl_path_rows(section, loads, N, M, bc)
    out = args.out
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bay", "y_m", "M_Nm_per_m", "sigma_Qy_MPa", "sigma_xx_tot_MPa",
                    "sigma_yy_tot_MPa", "sigma_vm_MPa"])
        for b, row in rows:
            w.writerow([b, f"{row[0]:.6g}", f"{row[1]:.9g}",
                        *(f"{v * 1e-6:.9g}" for v in row[2:])])
    y = np.array([r[0] for _, r in rows])
    svg.line_plot(os.path.splitext(out)[0] + ".svg",
                  {lbl: (y, np.array([r[k] for _, r in rows]) * 1e-6)
                   for lbl, k in (("sigma_Qy", 2), ("sigma_xx,tot", 3), ("sigma_yy,tot", 4),
                                  ("von Mises", 5))},
                  xlabel="y across panel (m)", ylabel="MPa",
                  title=f"ESL plate-centre path, {bc.value.upper()}")
    print(f"peak von Mises {max(r[5] for _, r in rows) * 1e-6:.6g} MPa -> {out}")
    return EXIT_OK


def esl_path_rows(section, loads, N, M, bc, n=50):
    """Plate-centre transverse path over every bay under uniform resultants (N, M).

    Returns (bay, (y, M, sigma_Qy, sigma_xx, sigma_yy, sigma_vm)) rows, y in panel frame."""
    abd = abd_from_section(section)
    e = np.linalg.solve(abd.matrix, np.concatenate([N, M]))
    strains = StrainState(e[:3], e[3:])
    mat, t = section.material, section.plate_thickness
    rows = []
    for b, load in enumerate(loads):
        y0 = b * section.spacing
        if load is None:
            load = LocalLoad.uniform(0.0, section.spacing)
        prof = path_profile(load, bc, strains, t, mat, n)
        for r in prof:
            rows.append((b, (y0 + r[0], *r[1:])))
    return rows


def cmd_study_b(args):
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise pl.ConfigError("--sizes needs at least one size")
    man, recs = _load_data(args.data)
    seed = man["config"]["seed"]
    tr, va, te = pl.split_by_design(recs, seed=seed)
    rows = pl.run_appendix_b_study(tr, va, te, sizes, _hgt_config(args, seed), args.target,
                                   verbose=args.verbose)
    os.makedirs(args.report, exist_ok=True)
    unit = pl.UNITS[args.target][0]
    with open(os.path.join(args.report, "study_b.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["train_size", f"test_rmse_{unit}", "best_epoch"])
        for s, e, b in rows:
            w.writerow([s, f"{e:.9g}", b])
            print(f"size {s:5d}: test RMSE {e:.6g} {unit}")
    svg.line_plot(os.path.join(args.report, "study_b.svg"),
                  {"test RMSE": ([r[0] for r in rows], [r[1] for r in rows])},
                  xlabel="training panels", ylabel=unit, title="Dataset-size study")
    mono = pl.trend_is_monotone([r[1] for r in rows])
    print("trend monotone within 10%:", mono)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="hullkit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a panel dataset")
    g.add_argument("--config", help="ExperimentConfig JSON")
    g.add_argument("--samples", type=int, help="number of box-beam designs")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--jsonl", action="store_true", help="also write the JSON-lines debug copy")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train one surrogate per target field")
    t.add_argument("--data", required=True)
    t.add_argument("--target", choices=pl.TARGET_FIELDS, default="vm")
    t.add_argument("--out", help="checkpoint path (default DATA/model_TARGET.ckpt)")
    t.add_argument("--timing", action="store_true", help="record wall time in the training log")
    _add_hgt_args(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--report", required=True)
    e.add_argument("--paths", type=int, default=3, help="test panels with path extracts")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("esl-stress", help="ESL-analytic plate-centre stress path of one panel")
    s.add_argument("--panel", required=True, help="PanelSection JSON")
    s.add_argument("--bc", choices=[b.value for b in BcAssumption], default="ff")
    s.add_argument("--load", required=True, help="LocalLoad JSON, or a list with one per bay")
    s.add_argument("--resultants", help='JSON {"N": [Nxx, Nyy, Nxy], "M": [Mxx, Myy, Mxy]}')
    s.add_argument("--out", default="esl_stress.csv", help="CSV path; the SVG goes alongside")
    s.set_defaults(func=cmd_esl_stress)

    b = sub.add_parser("study-b", help="training-set size study")
    b.add_argument("--data", required=True)
    b.add_argument("--sizes", default="100,400,1600")
    b.add_argument("--target", choices=pl.TARGET_FIELDS, default="vm")
    b.add_argument("--report", required=True)
    _add_hgt_args(b)
    b.set_defaults(func=cmd_study_b)
    return ap


def main(argv=None):
    n = os.environ.get("HULLKIT_THREADS")
    if n is not None and n.isdigit():
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (SolverError, TrainingDiverged) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (pl.ConfigError, SectionError, ModelError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
