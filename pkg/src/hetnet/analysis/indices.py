"""Closed-form stability indices: rho for cycles, nu for Kirk-Silber transverse
stability, and the regime catalogue that follows from their signs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..models import GHParams, KSParams


class NonPositiveInput(ValueError):
    pass


def rho(contracting, expanding) -> float:
    """Product of contracting magnitudes over product of expanding rates."""
    contracting = list(contracting)
    expanding = list(expanding)
    if not contracting or not expanding:
        raise NonPositiveInput("need at least one contracting and one expanding value")
    if any(not v > 0 for v in contracting + expanding):
        raise NonPositiveInput("all eigenvalue magnitudes must be > 0")
    return math.prod(contracting) / math.prod(expanding)


def rho_gh(p: GHParams) -> float:
    return rho([p.c13, p.c21, p.c32], [p.e12, p.e23, p.e31])


def rho_123(p: KSParams) -> float:
    return rho([p.c13, p.c21, p.c32], [p.e12, p.e23, p.e31])


def rho_124(p: KSParams) -> float:
    return rho([p.c14, p.c21, p.c42], [p.e12, p.e24, p.e41])


def _nu_triplet(c14, c13, e12, e23, e24, e31, c21, c32, t34):
    first = c14 / e12 - c13 * e24 / (e12 * e23) + c21 * c13 * t34 / (e12 * e31 * e23)
    second = -e24 / e23 + c21 * t34 / (e23 * e31) + c14 * c32 * c21 / (e12 * e23 * e31)
    third = t34 / e31 + c32 * c14 / (e12 * e31) - c32 * c13 * e24 / (e23 * e12 * e31)
    return first, second, third


# cycle 1-2-3 perturbed towards x4, then the same with 3 and 4 exchanged
NU_LABELS_4 = ("1234", "2314", "3124")
NU_LABELS_3 = ("1243", "2413", "4123")


def nu_quantities(p: KSParams) -> dict[str, float]:
    towards4 = _nu_triplet(p.c14, p.c13, p.e12, p.e23, p.e24, p.e31, p.c21, p.c32, p.t34)
    towards3 = _nu_triplet(p.c13, p.c14, p.e12, p.e24, p.e23, p.e41, p.c21, p.c42, p.t43)
    out = dict(zip(NU_LABELS_4, towards4))
    out.update(zip(NU_LABELS_3, towards3))
    return out


@dataclass
class StabilityIndices:
    rho_values: dict[str, float]
    nu_values: dict[str, float] = field(default_factory=dict)
    resonance_flags: dict[str, bool] = field(default_factory=dict)


ANALYTIC_RESONANCE_TOL = 1e-9
# Reference parameters are quoted to three significant figures, e.g. e41 = 0.646
# for a cycle meant to sit at rho_124 = 1; regime prediction uses this tolerance.
TABLE_RESONANCE_TOL = 1e-3


def stability_indices(p, resonance_tol: float = ANALYTIC_RESONANCE_TOL) -> StabilityIndices:
    if isinstance(p, GHParams):
        rhos = {"123": rho_gh(p)}
        nus = {}
    elif isinstance(p, KSParams):
        rhos = {"123": rho_123(p), "124": rho_124(p)}
        nus = nu_quantities(p)
    else:
        raise TypeError(f"no closed-form indices for {type(p).__name__}")
    flags = {k: abs(v - 1.0) <= resonance_tol for k, v in rhos.items()}
    return StabilityIndices(rhos, nus, flags)


class KSRegime(enum.Enum):
    NOT_AT_RESONANCE_NO_SWITCHING = "Not at resonance, no switching"
    NOT_AT_RESONANCE_SWITCHING = "Not at resonance, with switching"
    AT_RESONANCE_NO_SWITCHING = "At resonance, no switching"
    AT_RESONANCE_SWITCHING = "At resonance, switching"
    UNCATALOGUED = "Uncatalogued"


@dataclass
class RegimeReport:
    rho_123: float
    rho_124: float
    nu: dict[str, float]
    nu_signs: dict[str, int]
    resonant_cycles: list[str]
    switching: str | None  # "3->4", "4->3" or None
    regime: KSRegime
    note: str = ""


def predict_ks_regime(p: KSParams, resonance_tol: float = TABLE_RESONANCE_TOL) -> RegimeReport:
    if resonance_tol < 0:
        raise ValueError("resonance_tol must be >= 0")
    r3, r4 = rho_123(p), rho_124(p)
    nu = nu_quantities(p)
    signs = {k: (1 if v > 0 else -1 if v < 0 else 0) for k, v in nu.items()}
    resonant = [c for c, r in (("123", r3), ("124", r4)) if abs(r - 1.0) <= resonance_tol]
    neg4 = any(signs[k] < 0 for k in NU_LABELS_4)
    neg3 = any(signs[k] < 0 for k in NU_LABELS_3)
    pos4 = all(signs[k] > 0 for k in NU_LABELS_4)
    pos3 = all(signs[k] > 0 for k in NU_LABELS_3)
    switching = "3->4" if (neg4 and pos3) else "4->3" if (neg3 and pos4) else None
    note = ""
    if neg3 and neg4:
        regime = KSRegime.UNCATALOGUED
        note = "both cycles transversely unstable: no f.a.s. cycle"
    elif any(r < 1.0 - resonance_tol for r in (r3, r4)):
        regime = KSRegime.UNCATALOGUED
        note = "a cycle has rho < 1 within its own subspace"
    elif (neg3 or neg4) and switching is None:
        regime = KSRegime.UNCATALOGUED
        note = "a nu value is exactly zero"
    elif not (pos3 or neg3) or not (pos4 or neg4):
        regime = KSRegime.UNCATALOGUED
        note = "a nu value is exactly zero"
    elif resonant:
        regime = KSRegime.AT_RESONANCE_SWITCHING if switching else KSRegime.AT_RESONANCE_NO_SWITCHING
    else:
        regime = (KSRegime.NOT_AT_RESONANCE_SWITCHING if switching
                  else KSRegime.NOT_AT_RESONANCE_NO_SWITCHING)
    return RegimeReport(r3, r4, nu, signs, resonant, switching, regime, note)
