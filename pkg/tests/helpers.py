import numpy as np

from hullkit.cross_section import isotropic_stiffness
from hullkit.shell import ShellModel


def square_plate(a, n, t, distort=0.0, seed=0):
    """Flat n x n plate mesh in the global xy-plane, optionally with jittered interior nodes."""
    xs = np.linspace(0.0, a, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    inner = (X.ravel() > 0) & (X.ravel() < a) & (Y.ravel() > 0) & (Y.ravel() < a)
    rng = np.random.default_rng(seed)
    nodes[inner, :2] += distort * a / n * rng.uniform(-1, 1, (inner.sum(), 2))
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    conn = np.stack([idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel(),
                     idx[1:, 1:].ravel(), idx[1:, :-1].ravel()], axis=1)
    frames = np.repeat(np.eye(3)[None], len(conn), axis=0)
    return ShellModel(nodes, conn, frames, np.zeros(len(conn), int), [isotropic_stiffness(t)])
