"""Four-node flat FSDT shell element, assembly and linear solution.

Element technology:

* membrane: bilinear displacements enriched with four condensed incompatible
  modes (Taylor's corrected form, passes the patch test on distorted meshes);
* bending and membrane-bending coupling through the full 6x6 ABD matrix,
  2x2 Gauss integration;
* transverse shear: MITC4 assumed covariant strains (free of shear locking and
  of hourglass modes);
* drilling: penalty on the difference between the drilling rotation and the
  in-plane rotation of the membrane field, scaled to 1e-6 of the largest
  diagonal term.  The penalty vanishes for rigid-body motion.

Nodal DOFs are (u, v, w, theta_x, theta_y, theta_z).  In the element frame the
FSDT rotations are phi_x = theta_y and phi_y = -theta_x.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cross_section import AbdStiffness

log = logging.getLogger(__name__)

DRILL_FACTOR = 1e-6
_G = 1.0 / np.sqrt(3.0)
GAUSS_2x2 = [(-_G, -_G), (_G, -_G), (_G, _G), (-_G, _G)]
XI_NODES = np.array([-1.0, 1.0, 1.0, -1.0])
ETA_NODES = np.array([-1.0, -1.0, 1.0, 1.0])


class SolverError(RuntimeError):
    """Singular or non-convergent finite-element system."""


def shape(xi, eta):
    N = 0.25 * (1 + XI_NODES * xi) * (1 + ETA_NODES * eta)
    dN = 0.25 * np.array([XI_NODES * (1 + ETA_NODES * eta), ETA_NODES * (1 + XI_NODES * xi)])
    return N, dN


def _jacobian(xy, dN):
    J = np.einsum("an,mnb->mab", dN, xy)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(det <= 0):
        bad = np.flatnonzero(det <= 0)
        raise SolverError(f"non-positive Jacobian in elements {bad[:10].tolist()}")
    inv = np.empty_like(J)
    inv[:, 0, 0] = J[:, 1, 1] / det
    inv[:, 1, 1] = J[:, 0, 0] / det
    inv[:, 0, 1] = -J[:, 0, 1] / det
    inv[:, 1, 0] = -J[:, 1, 0] / det
    return J, det, inv


def _b_membrane_bending(dNxy):
    """Generalized strain operator (eps0, eps1) -> (m, 6, 24)."""
    m = dNxy.shape[0]
    B = np.zeros((m, 6, 24))
    dx, dy = dNxy[:, 0, :], dNxy[:, 1, :]
    for i in range(4):
        c = 6 * i
        B[:, 0, c] = dx[:, i]
        B[:, 1, c + 1] = dy[:, i]
        B[:, 2, c] = dy[:, i]
        B[:, 2, c + 1] = dx[:, i]
        B[:, 3, c + 4] = dx[:, i]
        B[:, 4, c + 3] = -dy[:, i]
        B[:, 5, c + 4] = dy[:, i]
        B[:, 5, c + 3] = -dx[:, i]
    return B


def _b_incompatible(xi, eta, inv0, det0, det):
    """Membrane strains of the modes (1-xi^2, 1-eta^2) for u and v -> (m, 6, 4)."""
    m = inv0.shape[0]
    nat = np.array([[-2 * xi, 0.0], [0.0, -2 * eta]])  # columns: P1, P2
    g = np.einsum("mab,bp->map", inv0, nat) * (det0 / det)[:, None, None]
    B = np.zeros((m, 6, 4))
    B[:, 0, 0], B[:, 0, 1] = g[:, 0, 0], g[:, 0, 1]
    B[:, 1, 2], B[:, 1, 3] = g[:, 1, 0], g[:, 1, 1]
    B[:, 2, 0], B[:, 2, 1] = g[:, 1, 0], g[:, 1, 1]
    B[:, 2, 2], B[:, 2, 3] = g[:, 0, 0], g[:, 0, 1]
    return B


def _covariant_shear_row(xy, xi, eta, direction):
    """Covariant transverse shear e_xi_z (direction 0) or e_eta_z (1) at a point."""
    N, dN = shape(xi, eta)
    J = np.einsum("an,mnb->mab", dN, xy)
    m = xy.shape[0]
    row = np.zeros((m, 24))
    xd, yd = J[:, direction, 0], J[:, direction, 1]
    for i in range(4):
        c = 6 * i
        row[:, c + 2] = dN[direction, i]
        row[:, c + 4] = N[i] * xd          # phi_x = theta_y
        row[:, c + 3] = -N[i] * yd         # phi_y = -theta_x
    return row


def _b_shear(xy, xi, eta, inv):
    eA = _covariant_shear_row(xy, 0.0, -1.0, 0)
    eC = _covariant_shear_row(xy, 0.0, 1.0, 0)
    eB = _covariant_shear_row(xy, -1.0, 0.0, 1)
    eD = _covariant_shear_row(xy, 1.0, 0.0, 1)
    e_xi = 0.5 * (1 - eta) * eA + 0.5 * (1 + eta) * eC
    e_eta = 0.5 * (1 - xi) * eB + 0.5 * (1 + xi) * eD
    cov = np.stack([e_xi, e_eta], axis=1)
    return np.einsum("mab,mbk->mak", inv, cov)


def _b_drill(N, dNxy):
    m = dNxy.shape[0]
    B = np.zeros((m, 1, 24))
    for i in range(4):
        c = 6 * i
        B[:, 0, c + 5] = N[i]
        B[:, 0, c + 1] = -0.5 * dNxy[:, 0, i]
        B[:, 0, c] = 0.5 * dNxy[:, 1, i]
    return B


@dataclass
class ElementMatrices:
    K: np.ndarray          # (m, 24, 24) local frame, condensed
    recover: np.ndarray    # (m, 4, 24) incompatible-mode amplitudes from nodal DOFs


def local_stiffness(xy: np.ndarray, abd: AbdStiffness, drill_factor=DRILL_FACTOR) -> ElementMatrices:
    """Element stiffness in the element frame for elements sharing one ABD record."""
    xy = np.asarray(xy, dtype=float)
    m = xy.shape[0]
    C = abd.matrix
    Ds = abd.shear
    _, dN0 = shape(0.0, 0.0)
    _, det0, inv0 = _jacobian(xy, dN0)
    Kuu = np.zeros((m, 24, 24))
    Kua = np.zeros((m, 24, 4))
    Kaa = np.zeros((m, 4, 4))
    Kd = np.zeros((m, 24, 24))
    for xi, eta in GAUSS_2x2:
        N, dN = shape(xi, eta)
        _, det, inv = _jacobian(xy, dN)
        dNxy = np.einsum("mab,bn->man", inv, dN)
        B = _b_membrane_bending(dNxy)
        Bi = _b_incompatible(xi, eta, inv0, det0, det)
        Bs = _b_shear(xy, xi, eta, inv)
        Bd = _b_drill(N, dNxy)
        w = det[:, None, None]
        CB = np.einsum("ij,mjk->mik", C, B)
        Kuu += np.einsum("mji,mjk->mik", B, CB) * w
        Kua += np.einsum("mji,mjk->mik", CB, Bi) * w
        Kaa += np.einsum("mja,jl,mlb->mab", Bi, C, Bi) * w
        Kuu += np.einsum("mji,jl,mlk->mik", Bs, Ds, Bs) * w
        Kd += np.einsum("mji,mjk->mik", Bd, Bd) * w
    recover = -np.linalg.solve(Kaa, np.transpose(Kua, (0, 2, 1)))
    K = Kuu + np.einsum("mia,mak->mik", Kua, recover)
    dmax = np.max(np.abs(np.diagonal(K, axis1=1, axis2=2)), axis=1)
    dd = np.max(np.diagonal(Kd, axis1=1, axis2=2)[:, 5::6], axis=1)
    K += Kd * (drill_factor * dmax / dd)[:, None, None]
    K = 0.5 * (K + np.transpose(K, (0, 2, 1)))
    return ElementMatrices(K, recover)


def generalized_strains(xy, d_local, recover, xi, eta):
    """(eps0, eps1, gamma) at natural point for element DOF vectors (m, 24)."""
    N, dN = shape(xi, eta)
    _, dN0 = shape(0.0, 0.0)
    _, det0, inv0 = _jacobian(xy, dN0)
    _, det, inv = _jacobian(xy, dN)
    dNxy = np.einsum("mab,bn->man", inv, dN)
    B = _b_membrane_bending(dNxy)
    Bi = _b_incompatible(xi, eta, inv0, det0, det)
    a = np.einsum("mak,mk->ma", recover, d_local)
    e = np.einsum("mik,mk->mi", B, d_local) + np.einsum("mia,ma->mi", Bi, a)
    g = np.einsum("mik,mk->mi", _b_shear(xy, xi, eta, inv), d_local)
    return e[:, :3], e[:, 3:], g


def transform_blocks(frames):
    """(m, 24, 24) rotation: local = T @ global, per element."""
    m = frames.shape[0]
    T = np.zeros((m, 24, 24))
    for b in range(8):
        T[:, 3 * b:3 * b + 3, 3 * b:3 * b + 3] = frames
    return T


def to_global(K_local, frames):
    m = K_local.shape[0]
    Kb = K_local.reshape(m, 8, 3, 8, 3)
    Kg = np.einsum("mki,makbl,mlj->maibj", frames, Kb, frames, optimize=True)
    return Kg.reshape(m, 24, 24)


def element_dofs(conn):
    return (6 * conn[:, :, None] + np.arange(6)[None, None, :]).reshape(len(conn), 24)


def local_coords(nodes, conn, frames):
    X = nodes[conn]                              # (m, 4, 3)
    rel = X - X[:, :1, :]
    return np.einsum("mnk,mak->mna", rel, frames[:, :2, :])


@dataclass
class ShellModel:
    """Shell elements ready for assembly.

    ``frames[e]`` holds the element axes (e1, e2, e3) as rows in global
    coordinates; ``stiffness_id[e]`` indexes ``stiffnesses``.
    """
    nodes: np.ndarray
    conn: np.ndarray
    frames: np.ndarray
    stiffness_id: np.ndarray
    stiffnesses: list
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_dof(self):
        return 6 * len(self.nodes)

    def element_matrices(self):
        if "em" not in self._cache:
            xy = local_coords(self.nodes, self.conn, self.frames)
            m = len(self.conn)
            K = np.zeros((m, 24, 24))
            R = np.zeros((m, 4, 24))
            for sid in np.unique(self.stiffness_id):
                sel = np.flatnonzero(self.stiffness_id == sid)
                em = local_stiffness(xy[sel], self.stiffnesses[sid])
                K[sel] = em.K
                R[sel] = em.recover
            self._cache["em"] = (xy, K, R)
        return self._cache["em"]

    def stiffness_matrix(self):
        if "K" not in self._cache:
            _, K_local, _ = self.element_matrices()
            Kg = to_global(K_local, self.frames)
            dofs = element_dofs(self.conn)
            rows = np.repeat(dofs, 24, axis=1).ravel()
            cols = np.tile(dofs, (1, 24)).ravel()
            K = sp.csr_matrix((Kg.ravel(), (rows, cols)), shape=(self.n_dof, self.n_dof))
            K.sum_duplicates()
            self._cache["K"] = K
        return self._cache["K"]

    def pressure_load(self, p_nodes):
        """Consistent nodal forces for element pressures (m, 4) at the nodes.

        Positive pressure pushes along -e3 of the element.
        """
        xy = local_coords(self.nodes, self.conn, self.frames)
        m = len(self.conn)
        fe = np.zeros((m, 4))
        for xi, eta in GAUSS_2x2:
            N, dN = shape(xi, eta)
            _, det, _ = _jacobian(xy, dN)
            p = p_nodes @ N
            fe += -(p * det)[:, None] * N[None, :]
        f = np.zeros(self.n_dof)
        forces = fe[:, :, None] * self.frames[:, None, 2, :]   # (m, 4, 3)
        idx = 6 * self.conn[:, :, None] + np.arange(3)
        np.add.at(f, idx.ravel(), forces.ravel())
        return f

    def area_load(self, traction):
        """Consistent nodal forces for a uniform global traction per element (m, 3), N/m^2."""
        xy = local_coords(self.nodes, self.conn, self.frames)
        m = len(self.conn)
        fe = np.zeros((m, 4))
        for xi, eta in GAUSS_2x2:
            N, dN = shape(xi, eta)
            _, det, _ = _jacobian(xy, dN)
            fe += det[:, None] * N[None, :]
        f = np.zeros(self.n_dof)
        forces = fe[:, :, None] * traction[:, None, :]
        idx = 6 * self.conn[:, :, None] + np.arange(3)
        np.add.at(f, idx.ravel(), forces.ravel())
        return f

    def element_local_dofs(self, d):
        d_el = d[element_dofs(self.conn)]
        T = transform_blocks(self.frames)
        return np.einsum("mij,mj->mi", T, d_el)

    def strains_at(self, d, xi=0.0, eta=0.0, elements=None):
        """Generalized strains (eps0, eps1, gamma) of selected elements at (xi, eta)."""
        xy, _, R = self.element_matrices()
        sel = np.arange(len(self.conn)) if elements is None else np.asarray(elements)
        d_loc = self.element_local_dofs(d)[sel]
        return generalized_strains(xy[sel], d_loc, R[sel], xi, eta)


def rigid_body_modes(nodes):
    """Six rigid-body displacement vectors (n_dof, 6): translations then rotations."""
    n = len(nodes)
    R = np.zeros((n, 6, 6))
    for k in range(3):
        R[:, k, k] = 1.0
        axis = np.zeros(3)
        axis[k] = 1.0
        R[:, :3, 3 + k] = np.cross(axis, nodes)
        R[:, 3 + k, 3 + k] = 1.0
    return R.reshape(6 * n, 6)


MODE_NAMES = ("translation x", "translation y", "translation z",
              "rotation about x", "rotation about y", "rotation about z")


def check_rigid_body_restraint(nodes, fixed_dofs):
    R = rigid_body_modes(nodes)[np.asarray(fixed_dofs, dtype=int)]
    if R.shape[0] == 0:
        raise SolverError("system is singular: no constrained DOFs (all rigid-body modes free)")
    scale = np.max(np.abs(R)) or 1.0
    _, s, vt = np.linalg.svd(R / scale)
    s = np.concatenate([s, np.zeros(6 - len(s))])
    free = [i for i in range(6) if s[i] < 1e-10 * max(s[0], 1e-300)]
    if free:
        mode = vt[free[0]] if free[0] < len(vt) else np.eye(6)[free[0]]
        name = MODE_NAMES[int(np.argmax(np.abs(mode)))]
        raise SolverError(f"system is singular: unconstrained rigid-body mode ({name})")


@dataclass
class Solution:
    d: np.ndarray
    reactions: np.ndarray   # full-length vector, non-zero on prescribed DOFs
    fixed: np.ndarray
    energy: float


def _threads():
    return max(1, int(os.environ.get("HULLKIT_THREADS", "1")))


def solve_linear(K, f, fixed_dofs, fixed_values=None, nodes=None, method="direct",
                 tol=1e-10, maxiter=20_000) -> Solution:
    """Solve K d = f with prescribed DOFs by row/column elimination."""
    n = K.shape[0]
    fixed = np.unique(np.asarray(fixed_dofs, dtype=int))
    vals = np.zeros(n)
    if fixed_values is not None:
        fv = np.asarray(fixed_values, dtype=float)
        if fv.shape == (n,):
            vals[fixed] = fv[fixed]
        else:
            vals[np.asarray(fixed_dofs, dtype=int)] = fv
    if nodes is not None:
        check_rigid_body_restraint(nodes, fixed)
    free = np.setdiff1d(np.arange(n), fixed)
    K = K.tocsr()
    Kff = K[free][:, free].tocsc()
    rhs = f[free] - K[free][:, fixed] @ vals[fixed]
    if method == "direct":
        try:
            # K is symmetric positive definite once supported: keep the fill-reducing
            # symmetric ordering by pivoting on the diagonal
            lu = spla.splu(Kff, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options=dict(SymmetricMode=True))
        except RuntimeError as exc:
            raise SolverError(f"system is singular: {exc}") from exc
        diag = np.abs(lu.U.diagonal())
        if diag.min() <= 1e-12 * diag.max():
            raise SolverError(f"system is singular: pivot ratio {diag.min() / diag.max():.3g} "
                              f"(mechanism among free DOFs)")
        x = lu.solve(rhs)
    elif method == "cg":
        dinv = 1.0 / Kff.diagonal()
        M = spla.LinearOperator(Kff.shape, matvec=lambda r: dinv * r)
        x, info = spla.cg(Kff, rhs, rtol=tol, maxiter=maxiter, M=M)
        res = np.linalg.norm(Kff @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
        if info != 0:
            raise SolverError(f"conjugate gradient did not converge: relative residual {res:.3e}")
    else:
        raise ValueError(f"unknown solver method {method!r}")
    d = vals.copy()
    d[free] = x
    if not np.all(np.isfinite(d)):
        raise SolverError("non-finite solution")
    r = K @ d - f
    reactions = np.zeros(n)
    reactions[fixed] = r[fixed]
    scale = max(np.linalg.norm(f), np.linalg.norm(reactions), np.linalg.norm(f[free] - rhs), 1e-300)
    res = np.linalg.norm(r[free]) / scale
    if method == "direct" and res > 1e-6:
        raise SolverError(f"inaccurate solve: relative residual {res:.3e}")
    return Solution(d, reactions, fixed, float(d @ (K @ d)))
