"""Conventional ESL stress prediction for stiffened panels.

Averaged stresses come from inverting the ABD relation on the global ESL
resultants; between stiffeners a beam-strip bending stress is superimposed.

Moment sign convention: every ``local_moment`` result satisfies M'' = q, i.e.
positive M is hogging (tension on the loaded face).  The fixed-fixed forms are
used as published; the simply-supported and guided-fixed forms are published
with the opposite (sagging-positive) sign, so their values are negated here.
The bending-stress height ``zeta`` is measured along the load direction, so the
pressure-exposed face sits at ``zeta = -t/2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cross_section import AbdStiffness, Material, PanelSection, StrainState, abd_from_section
from .strips import BAY, FLANGE, WEB, FieldGrid, panel_strips, strip_stations


class BcAssumption(str, Enum):
    FF = "ff"
    SS = "ss"
    GF = "gf"


UNIFORM, TRAPEZOIDAL, TRIANGULAR = "uniform", "trapezoidal", "triangular"


@dataclass(frozen=True)
class LocalLoad:
    """Line load on one bay of width ``l`` (N/m per unit length of stiffener).

    ``trapezoidal`` varies linearly from ``q1`` at y=0 to ``q2`` at y=l;
    ``triangular`` is zero up to ``a`` and rises linearly to ``q2`` at y=l.
    ``mirrored`` reflects the distribution (and the moment) about mid-bay.
    """
    kind: str
    l: float
    q: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    a: float = 0.0
    mirrored: bool = False

    def __post_init__(self):
        if self.kind not in (UNIFORM, TRAPEZOIDAL, TRIANGULAR):
            raise ValueError(f"unknown load kind {self.kind!r}")
        if not self.l > 0:
            raise ValueError("bay width must be positive")
        if not 0 <= self.a <= self.l:
            raise ValueError("triangular start a must lie in [0, l]")

    @classmethod
    def uniform(cls, q, l):
        return cls(UNIFORM, l, q=q)

    @classmethod
    def trapezoid(cls, q1, q2, l):
        return cls(TRAPEZOIDAL, l, q1=q1, q2=q2)

    @classmethod
    def triangle(cls, q2, a, l):
        return cls(TRIANGULAR, l, q2=q2, a=a)

    @property
    def is_zero(self) -> bool:
        return self.q == 0 and self.q1 == 0 and self.q2 == 0

    def intensity(self, y):
        """Load intensity q(y) on the bay."""
        y = np.asarray(y, dtype=float)
        if self.mirrored:
            y = self.l - y
        if self.kind == UNIFORM:
            return np.full_like(y, self.q)
        if self.kind == TRAPEZOIDAL:
            return self.q1 + (self.q2 - self.q1) * y / self.l
        if self.a >= self.l:
            return np.zeros_like(y)
        return np.where(y > self.a, self.q2 * (y - self.a) / (self.l - self.a), 0.0)

    def samples(self, n=10):
        return self.intensity(np.linspace(0.0, self.l, n))

    def to_dict(self):
        return dict(kind=self.kind, l=self.l, q=self.q, q1=self.q1, q2=self.q2, a=self.a,
                    mirrored=self.mirrored)

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["l"], d.get("q", 0.0), d.get("q1", 0.0), d.get("q2", 0.0),
                   d.get("a", 0.0), bool(d.get("mirrored", False)))


def _ff(load: LocalLoad, y):
    l = load.l
    if load.kind == UNIFORM:
        q = load.q
        return -q * l / 2 * y + q / 2 * y**2 + q * l**2 / 12
    if load.kind == TRAPEZOIDAL:
        q1, q2 = load.q1, load.q2
        return (q1 * l**2 / 20 + q2 * l**2 / 30 - (7 * q1 + 3 * q2) / 20 * l * y
                + q1 * y**2 / 2 + (q2 - q1) * y**3 / (6 * l))
    q2, a = load.q2, load.a
    left = q2 * (l - a)**3 * (3 * l * a - 9 * l * y - 6 * a * y + 2 * l**2) / (60 * l**3)
    if a >= l:
        return np.zeros_like(y)
    right = q2 / (60 * l**3 * (l - a)) * (
        2 * l**6 - 5 * l**5 * a - 9 * l**5 * y + 30 * l**4 * a * y - 30 * l**3 * a * y**2
        + 10 * l**3 * y**3 - 10 * l**2 * a**4 + 3 * l * a**5 + 15 * l * a**4 * y - 6 * a**5 * y)
    return np.where(y <= a, left, right)


def _ss(load: LocalLoad, y):
    l = load.l
    if load.kind == UNIFORM:
        q = load.q
        return q * y * (l - 4 * y) / 8
    if load.kind == TRAPEZOIDAL:
        q1, q2 = load.q1, load.q2
        return ((q1 - q2) * y**3 / (6 * l) - q1 * y**2 / 2
                + (l * q1 / 8 - l * (q1 - q2) / 10) * y)
    q2, a = load.q2, load.a
    base = -q2 * y * (a - l)**3 * (a + 4 * l) / (40 * l**3)
    if a >= l:
        return np.zeros_like(y)
    return np.where(y <= a, base, -q2 * (a - y)**3 / (6 * (a - l)) + base)


def _gf(load: LocalLoad, y):
    l = load.l
    if load.kind == UNIFORM:
        q = load.q
        return q * (l**2 - 3 * y**2) / 6
    if load.kind == TRAPEZOIDAL:
        q1, q2 = load.q1, load.q2
        return (l**2 * q1 / 6 - q1 * y**2 / 2 - l**2 * (q1 - q2) / 24
                + y**3 * (q1 - q2) / (6 * l))
    q2, a = load.q2, load.a
    base = -q2 * (a - l)**3 / (24 * l) + np.zeros_like(y)
    if a >= l:
        return np.zeros_like(y)
    return np.where(y <= a, base, base - q2 * (a - y)**3 / (6 * (a - l)))


def local_moment(load: LocalLoad, bc: BcAssumption | str, y):
    """Bending moment per unit width at bay coordinate ``y`` (hogging positive)."""
    bc = BcAssumption(bc)
    y_arr = np.asarray(y, dtype=float)
    tol = 1e-12 * load.l
    if np.any(y_arr < -tol) or np.any(y_arr > load.l + tol):
        raise ValueError("y outside the bay [0, l]")
    y_arr = np.clip(y_arr, 0.0, load.l)
    if load.mirrored:
        y_arr = load.l - y_arr
    if bc is BcAssumption.FF:
        m = _ff(load, y_arr)
    elif bc is BcAssumption.SS:
        m = -_ss(load, y_arr)
    else:
        m = -_gf(load, y_arr)
    m = np.asarray(m, dtype=float)
    return m.item() if m.ndim == 0 else m


def local_bending_stress(M, zeta, t_p, nu):
    """Cylindrical-bending stresses (sigma_Qx, sigma_Qy) at height ``zeta``."""
    s_y = -np.asarray(zeta) * 12.0 * np.asarray(M) / t_p**3
    return nu * s_y, s_y


@dataclass
class StressState:
    sxx: np.ndarray
    syy: np.ndarray
    txy: np.ndarray
    z: np.ndarray | float = 0.0


def averaged_stress(strains: StrainState, z, material: Material) -> StressState:
    """Plane-stress Hooke on eps0 + z * eps1 (arrays broadcast over leading axes)."""
    e = np.asarray(strains.eps0) + np.asarray(z)[..., None] * np.asarray(strains.eps1)
    E, nu, G = material.youngs_modulus, material.poisson_ratio, material.shear_modulus
    c = E / (1.0 - nu * nu)
    return StressState(c * (e[..., 0] + nu * e[..., 1]), c * (e[..., 1] + nu * e[..., 0]),
                       G * e[..., 2], z)


def total_stress(avg: StressState, local) -> StressState:
    sqx, sqy = local
    return StressState(avg.sxx + sqx, avg.syy + sqy, avg.txy, avg.z)


def von_mises(s: StressState):
    return np.sqrt(np.maximum(s.sxx**2 - s.sxx * s.syy + s.syy**2 + 3.0 * s.txy**2, 0.0))


def _strains_at(abd: AbdStiffness, N, M) -> StrainState:
    K = abd.matrix
    rhs = np.concatenate([N, M], axis=-1)
    e = np.linalg.solve(K, rhs.reshape(-1, 6).T).T.reshape(rhs.shape)
    return StrainState(e[..., :3], e[..., 3:])


def esl_stress_field(resultants, section: PanelSection, loads, bc=BcAssumption.FF,
                     abd: AbdStiffness | None = None):
    """Von Mises FieldGrids for every strip of a panel from ESL resultants.

    ``resultants(x, y)`` returns (N, M) arrays of shape (..., 3) at panel-frame
    points.  ``loads`` holds one LocalLoad (or None) per bay; bays without load
    get no local bending term.  Plates are evaluated at the loaded face, webs
    and flanges at their signed height below the reference surface.
    """
    abd = abd or abd_from_section(section)
    mat = section.material
    t = section.plate_thickness
    out = []
    for strip in panel_strips(section):
        X, Y, Z = strip_stations(strip, section.span)
        N, M = resultants(X, Y)
        strains = _strains_at(abd, np.asarray(N), np.asarray(M))
        if strip.kind == BAY:
            z_eval = np.full(X.shape, 0.5 * t)
        else:
            z_eval = np.asarray(Z, dtype=float)
        s = averaged_stress(strains, z_eval, mat)
        load = loads[strip.index] if strip.kind == BAY and loads else None
        if load is not None and not load.is_zero:
            y_loc = np.clip(Y - strip.p0[0], 0.0, load.l)
            m = local_moment(load, bc, y_loc)
            s = total_stress(s, local_bending_stress(m, -z_eval, t, mat.poisson_ratio))
        out.append(FieldGrid(von_mises(s), strip.name, "vm"))
    return out


def path_profile(load: LocalLoad, bc, strains: StrainState, t_p, material, n=50):
    """Plate-centre transverse path through one bay at the loaded face.

    Returns columns (y, M, sigma_Qy, sigma_xx_tot, sigma_yy_tot, sigma_vm).
    """
    y = np.linspace(0.0, load.l, n)
    m = local_moment(load, bc, y)
    z = 0.5 * t_p
    avg = averaged_stress(strains, np.full(n, z), material)
    sqx, sqy = local_bending_stress(m, -z, t_p, material.poisson_ratio)
    tot = total_stress(avg, (sqx, sqy))
    return np.column_stack([y, m, np.broadcast_to(sqy, y.shape), tot.sxx, tot.syy, von_mises(tot)])
