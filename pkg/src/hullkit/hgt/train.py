"""Mini-batch Adam training with cosine learning-rate decay and best-validation selection."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import (
    BN_MOMENTUM, HgtConfig, HgtParameters, Normalizer, batch_graphs, init_params, mse_and_grads,
    predict,
)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainLog:
    rows: list = field(default_factory=list)   # (epoch, train RMSE, val RMSE, wall seconds)
    best_epoch: int = -1
    best_val: float = math.inf

    @property
    def train_rmse(self):
        return np.array([r[1] for r in self.rows])

    @property
    def val_rmse(self):
        return np.array([r[2] for r in self.rows])

    def write_csv(self, path, timing=True):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_rmse", "val_rmse", "wall_s"])
            for e, tr, va, wall in self.rows:
                w.writerow([e, repr(tr), repr(va), f"{wall:.3f}" if timing else "0"])


class Adam:
    def __init__(self, params: dict, lr):
        self.lr = lr
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict, lr=None):
        lr = self.lr if lr is None else lr
        b1, b2 = ADAM_BETAS
        self.t += 1
        c1, c2 = 1 - b1 ** self.t, 1 - b2 ** self.t
        for k in sorted(params):
            g = grads[k]
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            params[k] -= lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + ADAM_EPS)


def cosine_lr(base, step, total):
    if total <= 1:
        return base
    return 0.5 * base * (1.0 + math.cos(math.pi * min(step, total) / total))


def relations_of(graphs):
    rels = set()
    for g in graphs:
        rels.update(tuple(r) for r, idx in g.edges.items() if idx.shape[1])
    return sorted(rels)


def dataset_rmse(samples, params: HgtParameters, batch_size=64) -> float:
    """RMSE in physical units over every predicted point in ``samples``."""
    sq, n = 0.0, 0
    for i in range(0, len(samples), batch_size):
        chunk = samples[i:i + batch_size]
        g = batch_graphs([s[0] for s in chunk])
        y = np.concatenate([np.asarray(s[1], float) for s in chunk])
        p = predict(g, params)
        sq += float(np.sum((p - y) ** 2))
        n += y.size
    return math.sqrt(sq / n) if n else math.nan


def train(train_set, config: HgtConfig, val_set=None, normalizer: Normalizer = None,
          relations=None, max_steps=None, eval_every=1, verbose=False):
    """Train on a list of (graph, target (n_geometry, 500)) pairs.

    Returns (best-validation parameters, TrainLog).  Without a validation set the
    training RMSE selects the checkpoint."""
    if not train_set:
        raise ValueError("empty training set")
    graphs = [s[0] for s in train_set]
    if normalizer is None:
        normalizer = Normalizer.fit(graphs, [s[1] for s in train_set])
    if relations is None:
        relations = relations_of(graphs + [s[0] for s in (val_set or [])])
    params = init_params(config, relations)
    params.norm = normalizer
    opt = Adam(params.weights, config.learning_rate)
    rng = np.random.default_rng(config.seed)

    n = len(train_set)
    per_epoch = math.ceil(n / config.batch_size)
    total = per_epoch * config.max_epochs
    if max_steps is not None:
        total = min(total, max_steps)
    log = TrainLog()
    best = params.copy()
    t0 = time.perf_counter()
    step, epoch = 0, 0
    batches = {}
    while step < total:
        order = rng.permutation(n)
        sq, cnt = 0.0, 0
        for b in range(per_epoch):
            if step >= total:
                break
            idx = tuple(sorted(order[b * config.batch_size:(b + 1) * config.batch_size]))
            if idx not in batches:
                if len(batches) > 256:
                    batches.clear()
                batches[idx] = (batch_graphs([train_set[i][0] for i in idx]),
                                np.concatenate([np.asarray(train_set[i][1], float) for i in idx]))
            g, y = batches[idx]
            mse, grads, stats = mse_and_grads(g, params, y, training=True)
            if not math.isfinite(mse) or not all(np.all(np.isfinite(v)) for v in grads.values()):
                bad = [k for k, v in grads.items() if not np.all(np.isfinite(v))][:5]
                raise TrainingDiverged(f"non-finite loss {mse} at epoch {epoch} step {step}; "
                                       f"non-finite gradients in {bad or 'none'}")
            opt.step(params.weights, grads, cosine_lr(config.learning_rate, step, total))
            for k, v in stats.items():
                params.running[k] = (1 - BN_MOMENTUM) * params.running[k] + BN_MOMENTUM * v
            sq += mse * y.size
            cnt += y.size
            step += 1
        epoch += 1
        if epoch % eval_every and step < total:
            continue
        tr = math.sqrt(sq / cnt) * normalizer.target_std
        va = dataset_rmse(val_set, params, config.batch_size) if val_set else \
            dataset_rmse(train_set, params, config.batch_size)
        log.rows.append((epoch, tr, va, time.perf_counter() - t0))
        if verbose:
            print(f"epoch {epoch:4d}  train {tr:.6g}  val {va:.6g}", flush=True)
        if va < log.best_val:
            log.best_val, log.best_epoch = va, epoch
            best = params.copy()
    return best, log
