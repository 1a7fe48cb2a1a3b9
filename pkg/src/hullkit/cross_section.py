"""Homogenized (ESL) stiffness of T-stiffened panels.

The reference surface is the plate mid-plane.  The panel-local ``z`` axis points
away from the stiffeners (towards the pressure-loaded face), so webs and flanges
sit at negative ``z``; this offset is what produces the membrane-bending coupling.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

SCHEMA_VERSION = 1
SHEAR_CORRECTION = 5.0 / 6.0


class SectionError(ValueError):
    """Invalid or degenerate panel cross-section."""


@dataclass(frozen=True)
class Material:
    youngs_modulus: float = 200e9
    poisson_ratio: float = 0.3
    density: float = 7850.0
    shear_modulus: float = field(default=None)  # derived when omitted

    def __post_init__(self):
        if self.shear_modulus is None:
            object.__setattr__(self, "shear_modulus",
                               self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio)))
        self.validate()

    def validate(self):
        if not self.youngs_modulus > 0:
            raise SectionError("youngs_modulus must be positive")
        if not 0 <= self.poisson_ratio < 0.5:
            raise SectionError("poisson_ratio must lie in [0, 0.5)")
        g = self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
        if abs(self.shear_modulus - g) > 1e-12 * g:
            raise SectionError("shear_modulus inconsistent with E and nu")

    def plane_stress(self) -> np.ndarray:
        """Plane-stress constitutive matrix Q (3x3, engineering shear strain)."""
        E, nu = self.youngs_modulus, self.poisson_ratio
        c = E / (1.0 - nu * nu)
        return np.array([[c, c * nu, 0.0],
                         [c * nu, c, 0.0],
                         [0.0, 0.0, self.shear_modulus]])


STEEL = Material()


@dataclass(frozen=True)
class PanelSection:
    """T-stiffened panel: plate of width ``width`` and length ``span`` with
    ``stiffener_count`` equally spaced stiffeners running along the span.

    ``stiffener_count == 0`` with zero stiffener dimensions denotes a bare plate.
    """
    plate_thickness: float
    web_thickness: float
    web_height: float
    flange_thickness: float
    flange_width: float
    stiffener_count: int
    span: float
    width: float
    material: Material = STEEL

    def __post_init__(self):
        self.validate()

    @classmethod
    def bare_plate(cls, thickness, span, width, material=STEEL):
        return cls(thickness, 0.0, 0.0, 0.0, 0.0, 0, span, width, material)

    @property
    def is_bare(self) -> bool:
        return self.stiffener_count == 0

    @property
    def spacing(self) -> float:
        return self.width / (self.stiffener_count + 1)

    @property
    def flange_z(self) -> float:
        """Flange mid-surface height in the shell idealization."""
        return -(0.5 * self.plate_thickness + self.web_height)

    def stiffener_positions(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.stiffener_count + 1)

    def validate(self):
        if not (self.plate_thickness > 0 and self.span > 0 and self.width > 0):
            raise SectionError("plate thickness, span and width must be positive")
        if self.stiffener_count == 0:
            if any(v != 0 for v in (self.web_thickness, self.web_height,
                                    self.flange_thickness, self.flange_width)):
                raise SectionError("bare plate must have zero stiffener dimensions")
            return
        if self.stiffener_count < 2:
            raise SectionError(f"stiffener_count={self.stiffener_count} below 2")
        dims = (self.web_thickness, self.web_height, self.flange_thickness, self.flange_width)
        if not all(v > 0 for v in dims):
            raise SectionError("stiffener dimensions must be positive")
        if self.flange_width >= self.spacing:
            raise SectionError("flange width exceeds stiffener spacing")
        if abs(self.spacing * (self.stiffener_count + 1) - self.width) > 1e-9:
            raise SectionError("stiffeners are not equally spaced")

    def rectangles(self):
        """Cross-section rectangles per unit spacing as (width, z_bottom, z_top, directional).

        ``directional`` rectangles (web, flange) only stiffen the stiffener direction.
        """
        t = self.plate_thickness
        rects = [(1.0, -0.5 * t, 0.5 * t, False)]
        if not self.is_bare:
            s = self.spacing
            z_web = -0.5 * t
            z_fl = z_web - self.web_height
            rects.append((self.web_thickness / s, z_fl, z_web, True))
            rects.append((self.flange_width / s, z_fl - self.flange_thickness, z_fl, True))
        return rects

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "material"}
        m = self.material
        d.update(youngs_modulus=m.youngs_modulus, poisson_ratio=m.poisson_ratio,
                 density=m.density, schema_version=SCHEMA_VERSION)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PanelSection":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SectionError(f"unsupported section schema_version {version!r}")
        mat = Material(d["youngs_modulus"], d["poisson_ratio"], d.get("density", 7850.0))
        keys = ("plate_thickness", "web_thickness", "web_height", "flange_thickness",
                "flange_width", "stiffener_count", "span", "width")
        kw = {k: d[k] for k in keys}
        kw["stiffener_count"] = int(kw["stiffener_count"])
        return cls(material=mat, **kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PanelSection":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AbdStiffness:
    A: np.ndarray
    Bc: np.ndarray
    C: np.ndarray
    D: np.ndarray
    d_qx: float
    d_qy: float
    shear_correction: float = SHEAR_CORRECTION

    @property
    def matrix(self) -> np.ndarray:
        """Assembled 6x6 relation (N, M) = K (eps0, eps1)."""
        return np.block([[self.A, self.Bc], [self.C, self.D]])

    @property
    def shear(self) -> np.ndarray:
        return np.diag([self.d_qx, self.d_qy])


@dataclass(frozen=True)
class ResultantState:
    N: np.ndarray  # (N_xx, N_yy, N_xy)
    M: np.ndarray  # (M_xx, M_yy, M_xy)
    Q: np.ndarray = field(default_factory=lambda: np.zeros(2))  # (Q_x, Q_y)

    @classmethod
    def zeros(cls):
        return cls(np.zeros(3), np.zeros(3), np.zeros(2))


@dataclass(frozen=True)
class StrainState:
    eps0: np.ndarray
    eps1: np.ndarray
    gamma: np.ndarray = field(default_factory=lambda: np.zeros(2))  # (g_xz, g_yz)


def shear_stiffness(section: PanelSection, k: float = SHEAR_CORRECTION):
    """Transverse shear stiffnesses (d_qx, d_qy); d_qx counts the webs only."""
    if not 0 < k <= 1:
        raise ValueError("shear correction must lie in (0, 1]")
    G = section.material.shear_modulus
    if section.is_bare:
        d_qx = k * G * section.plate_thickness
    else:
        d_qx = k * G * section.web_thickness / section.spacing * section.web_height
    d_qy = k * G * section.plate_thickness
    return d_qx, d_qy


def _check_positive_definite(K):
    scale = np.max(np.abs(np.diag(K)))
    try:
        np.linalg.cholesky(K / scale)
    except np.linalg.LinAlgError as exc:
        raise SectionError("stiffness matrix is not positive definite") from exc


def abd_from_section(section: PanelSection, k: float = SHEAR_CORRECTION) -> AbdStiffness:
    """Closed-form smeared ABD integrals per rectangle about the plate mid-plane."""
    mat = section.material
    Q = mat.plane_stress()
    E = mat.youngs_modulus
    A = np.zeros((3, 3))
    B = np.zeros((3, 3))
    D = np.zeros((3, 3))
    for w, z0, z1, directional in section.rectangles():
        m0 = w * (z1 - z0)
        m1 = w * (z1 ** 2 - z0 ** 2) / 2.0
        m2 = w * (z1 ** 3 - z0 ** 3) / 3.0
        if directional:
            A[0, 0] += E * m0
            B[0, 0] += E * m1
            D[0, 0] += E * m2
        else:
            A += Q * m0
            B += Q * m1
            D += Q * m2
    d_qx, d_qy = shear_stiffness(section, k)
    abd = AbdStiffness(A, B, B.copy(), D, d_qx, d_qy, k)
    _check_positive_definite(abd.matrix)
    return abd


def isotropic_stiffness(thickness: float, material: Material = STEEL,
                        k: float = SHEAR_CORRECTION) -> AbdStiffness:
    """Plain plate of uniform thickness (bulkheads, unstiffened plates)."""
    return abd_from_section(PanelSection.bare_plate(thickness, 1.0, 1.0, material), k)


def forward_abd(stiffness: AbdStiffness, strains: StrainState) -> ResultantState:
    NM = stiffness.matrix @ np.concatenate([strains.eps0, strains.eps1])
    return ResultantState(NM[:3], NM[3:], stiffness.shear @ strains.gamma)


def invert_abd(stiffness: AbdStiffness, resultants: ResultantState) -> StrainState:
    """Mid-plane strains and curvatures from resultants (N, M, Q)."""
    K = stiffness.matrix
    if not (stiffness.d_qx > 0 and stiffness.d_qy > 0):
        raise np.linalg.LinAlgError("transverse shear stiffness is not positive")
    cond = np.linalg.cond(K)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"ABD matrix is singular (cond={cond:.3g})")
    e = np.linalg.solve(K, np.concatenate([resultants.N, resultants.M]))
    Qv = np.asarray(resultants.Q, dtype=float)
    gamma = np.array([Qv[0] / stiffness.d_qx, Qv[1] / stiffness.d_qy])
    return StrainState(e[:3], e[3:], gamma)
