"""Cross-section stiffness and inertia coefficients (Kirchhoff relations).

Principal axes are aligned with the directors; ``xi`` runs along ``d1`` and
``eta`` along ``d2``. A rectangle of width ``B`` (along ``d1``) and thickness
``D`` (along ``d2``) therefore bends about ``d1`` with ``J11 = E*B*D**3/12``,
which gives the lower flexural frequencies in the e2-e3 plane.
"""

from dataclasses import dataclass

__all__ = [
    "DEFAULT_POISSON",
    "Material",
    "SectionProperties",
    "rect_section",
    "section_from_integrals",
    "shear_modulus_default",
]

# Flexural and axial results do not depend on G; torsion does.
DEFAULT_POISSON = 0.3


def shear_modulus_default(E: float, nu_poisson: float = DEFAULT_POISSON) -> float:
    if not -1.0 < nu_poisson <= 0.5:
        raise ValueError(f"Poisson ratio must lie in (-1, 0.5], got {nu_poisson}")
    return E / (2.0 * (1.0 + nu_poisson))


@dataclass(frozen=True)
class Material:
    E: float
    rho: float
    G: float = None

    def __post_init__(self):
        if self.G is None:
            object.__setattr__(self, "G", shear_modulus_default(self.E))
        for name in ("E", "G", "rho"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SectionProperties:
    """Stiffness (N, N m^2) and inertia (kg m, kg/m) coefficients of a section."""

    A: float
    K33: float
    J11: float
    J22: float
    J33: float
    I11: float
    I22: float
    I33: float
    mu: float

    def __post_init__(self):
        for name, val in vars(self).items():
            if not val > 0.0:
                raise ValueError(f"section coefficient {name} must be positive, got {val}")

    def key(self) -> tuple:
        return (self.A, self.K33, self.J11, self.J22, self.J33, self.I11, self.I22, self.I33, self.mu)


def section_from_integrals(A: float, int_eta2: float, int_xi2: float, mat: Material) -> SectionProperties:
    """Build a principal-axis section from its area and second moments.

    ``int_eta2`` is the integral of eta**2 (eta along d2) and ``int_xi2`` the
    integral of xi**2 over the section.
    """
    J11 = mat.E * int_eta2
    J22 = mat.E * int_xi2
    I11 = mat.rho * int_eta2
    I22 = mat.rho * int_xi2
    return SectionProperties(
        A=A,
        K33=mat.E * A,
        J11=J11,
        J22=J22,
        J33=mat.G / mat.E * (J11 + J22),
        I11=I11,
        I22=I22,
        I33=I11 + I22,
        mu=mat.rho * A,
    )


def rect_section(B: float, D: float, mat: Material) -> SectionProperties:
    if not (B > 0.0 and D > 0.0):
        raise ValueError(f"section dimensions must be positive, got B={B}, D={D}")
    return section_from_integrals(B * D, B * D**3 / 12.0, D * B**3 / 12.0, mat)
