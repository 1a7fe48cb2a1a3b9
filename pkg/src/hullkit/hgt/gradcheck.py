"""Central finite-difference check of the analytic gradients."""
from __future__ import annotations

import numpy as np

from .model import HgtParameters, _family, mse_and_grads, mse_only


def gradient_check(graph, params: HgtParameters, target, per_family=50, step=1e-6, seed=0,
                   training=True):
    """Relative error ||fd - analytic|| / max(||fd||, ||analytic||) per parameter family.

    Up to ``per_family`` random entries are probed in each family.  Entries whose
    analytic gradient is exactly zero (parameters with no path to the output) are
    skipped.  Parameters are restored afterwards."""
    rng = np.random.default_rng(seed)
    _, grads, _ = mse_and_grads(graph, params, target, training=training)
    pool = {}
    for name, g in grads.items():
        nz = np.flatnonzero(g)
        if nz.size:
            pool.setdefault(_family(name), []).extend((name, int(i)) for i in nz)
    errors = {}
    for fam in sorted(pool):
        cand = pool[fam]
        pick = rng.choice(len(cand), size=min(per_family, len(cand)), replace=False)
        fd, an = [], []
        for j in sorted(pick):
            name, i = cand[j]
            w = params.weights[name]
            old = w.flat[i]
            w.flat[i] = old + step
            fp = mse_only(graph, params, target, training)
            w.flat[i] = old - step
            fm = mse_only(graph, params, target, training)
            w.flat[i] = old
            fd.append((fp - fm) / (2 * step))
            an.append(grads[name].flat[i])
        fd, an = np.array(fd), np.array(an)
        errors[fam] = float(np.linalg.norm(fd - an) / max(np.linalg.norm(fd), np.linalg.norm(an)))
    return errors
