"""Independent reference solutions used by the test-suite only."""
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def beam_moment_fd(q, l, bc, n=10_000):
    """Moment of a beam strip from the boundary-value problem by finite differences.

    Unknowns are nodal moments M and deflections w (EI = 1) with M'' = q and
    w'' = M, i.e. positive M is hogging.  ``bc`` is "ff" (clamped both ends),
    "ss" (pinned both ends) or "gf" (guided at y=0, clamped at y=l).
    The problem is solved on a unit span (M scales with l^2), so one
    factorization per (bc, n) serves every bay width.  Returns (y, M).
    """
    s = np.linspace(0.0, 1.0, n + 1)
    qv = np.asarray(q(l * s), dtype=float)
    lu, rhs_rows = _beam_system(bc, n)
    h = 1.0 / n
    rhs = np.zeros(2 * (n + 1))
    rhs[rhs_rows] = qv[1:n]
    if bc == "gf":
        rhs[-4] = h**2 * (2 * qv[0] + qv[1]) / 6
    return l * s, l**2 * lu.solve(rhs)[:n + 1]


@lru_cache(maxsize=None)
def _beam_system(bc, n):
    h = 1.0 / n
    N = n + 1
    rows, cols, vals = [], [], []
    count = [0]

    def eq(entries):
        r = count[0]
        for c, v in entries:
            rows.append(r)
            cols.append(c)
            vals.append(v)
        count[0] += 1
        return r

    M = lambda i: i
    W = lambda i: N + i
    q_rows = []
    for i in range(1, n):
        q_rows.append(eq([(M(i - 1), 1 / h**2), (M(i), -2 / h**2), (M(i + 1), 1 / h**2)]))
        eq([(W(i - 1), 1 / h**2), (W(i), -2 / h**2), (W(i + 1), 1 / h**2), (M(i), -1.0)])
    # slope conditions from the Taylor relation exact for piecewise-linear M
    slope0 = [(W(1), 1.0), (W(0), -1.0), (M(0), -h**2 / 3), (M(1), -h**2 / 6)]
    slopeN = [(W(n - 1), 1.0), (W(n), -1.0), (M(n), -h**2 / 3), (M(n - 1), -h**2 / 6)]
    if bc == "ff":
        tail = [[(W(0), 1.0)], [(W(n), 1.0)], slope0, slopeN]
    elif bc == "ss":
        tail = [[(W(0), 1.0)], [(W(n), 1.0)], [(M(0), 1.0)], [(M(n), 1.0)]]
    elif bc == "gf":
        # zero shear at the guided end, M'(0) = 0; its load term is rhs[-4]
        tail = [[(M(1), 1.0), (M(0), -1.0)], slope0, [(W(n), 1.0)], slopeN]
    else:
        raise ValueError(bc)
    for t in tail:
        eq(t)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(2 * N, 2 * N))
    return spla.splu(A), np.array(q_rows)


def navier_ss_plate_center(nu_terms=199):
    """Centre deflection coefficient w D / (q a^4) of a simply supported square plate."""
    total = 0.0
    for m in range(1, nu_terms + 1, 2):
        for n in range(1, nu_terms + 1, 2):
            total += (np.sin(m * np.pi / 2) * np.sin(n * np.pi / 2)
                      / (m * n * (m**2 + n**2) ** 2))
    return 16.0 / np.pi**6 * total


def ritz_clamped_plate_center(order=10):
    """Centre deflection coefficient of a clamped square plate (Ritz polynomial series).

    Trial functions x^2 (1-x)^2 x^i in each direction on the unit square; for
    clamped edges the strain energy reduces to D/2 * int (lap w)^2.
    """
    xg, wg = np.polynomial.legendre.leggauss(40)
    x = 0.5 * (xg + 1.0)
    wq = 0.5 * wg
    P = np.polynomial.Polynomial
    base = P([0, 0, 1]) * P([1, -1]) ** 2
    funcs = [base * P([0] * i + [1]) for i in range(order)]
    f0 = np.array([f(x) for f in funcs])
    f2 = np.array([f.deriv(2)(x) for f in funcs])
    # 1D integrals
    I00 = (f0 * wq) @ f0.T
    I22 = (f2 * wq) @ f2.T
    I02 = (f0 * wq) @ f2.T
    one = f0 @ wq
    # (lap w)^2 = (phi_i'' psi_j + phi_i psi_j'')(phi_k'' psi_l + phi_k psi_l'')
    K = (np.kron(I22, I00) + np.kron(I00, I22) + np.kron(I02.T, I02) + np.kron(I02, I02.T))
    F = np.kron(one, one)
    c = np.linalg.solve(K, F)
    centre = np.array([f(0.5) for f in funcs])
    return float(np.kron(centre, centre) @ c)
