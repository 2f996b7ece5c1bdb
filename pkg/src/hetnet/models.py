"""Vector fields of the form x_j' = x_j (1 - chi + sum_k a[k, j] x_k^2).

The coefficient matrix is stored so that ``a[k, j]`` multiplies the k-th
squared coordinate in equation j.  With that convention the Jacobian at the
axis equilibrium xi_j has eigenvalue ``a[j, k]`` in direction x_k.

Indices in the public API (equilibrium labels, preset parameter names) are
1-based to match the usual notation xi_1, ..., xi_n; arrays are 0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

import numpy as np


class ModelError(ValueError):
    pass


class DiagonalNonzero(ModelError):
    pass


class DimensionTooSmall(ModelError):
    pass


class NonPositiveParameter(ModelError):
    pass


class NegativeCoordinate(ModelError):
    pass


class AlreadyLV(ModelError):
    pass


class IndexOutOfRange(ModelError):
    pass


class Representation(enum.Enum):
    EQUIVARIANT_CUBIC = "equivariant-cubic"
    LOTKA_VOLTERRA = "lotka-volterra"


@dataclass(frozen=True, eq=False)
class NetworkModel:
    a: np.ndarray
    representation: Representation = Representation.EQUIVARIANT_CUBIC
    orthant_restricted: bool = True
    name: str = "generic"

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ModelError(f"coefficient matrix must be square, got shape {a.shape}")
        if a.shape[0] < 3:
            raise DimensionTooSmall(f"n must be >= 3, got {a.shape[0]}")
        if np.any(np.diag(a) != 0.0):
            raise DiagonalNonzero("a[k, k] must be zero for every k")
        if not np.all(np.isfinite(a)):
            raise ModelError("coefficient matrix must be finite")
        if self.representation is Representation.LOTKA_VOLTERRA and not self.orthant_restricted:
            raise ModelError("Lotka-Volterra models are always orthant-restricted")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def is_cubic(self) -> bool:
        return self.representation is Representation.EQUIVARIANT_CUBIC

    def __eq__(self, other):
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (
            self.representation is other.representation
            and self.orthant_restricted == other.orthant_restricted
            and np.array_equal(self.a, other.a)
        )

    def __hash__(self):
        return hash((self.representation, self.orthant_restricted, self.a.tobytes()))

    def with_orthant(self, restricted: bool) -> "NetworkModel":
        return NetworkModel(self.a, self.representation, restricted, self.name)


@dataclass(frozen=True)
class Equilibrium:
    index: int  # 1-based axis index
    sign: int
    coordinates: np.ndarray = field(repr=False)

    @property
    def label(self) -> str:
        prefix = "" if self.sign > 0 else "-"
        return f"{prefix}xi{self.index}"


def _check_positive(params) -> None:
    for f in fields(params):
        v = getattr(params, f.name)
        if not (v > 0):
            raise NonPositiveParameter(f"{type(params).__name__}.{f.name} must be > 0, got {v}")


@dataclass(frozen=True)
class GHParams:
    c21: float
    c32: float
    c13: float
    e12: float
    e23: float
    e31: float

    def __post_init__(self):
        _check_positive(self)


@dataclass(frozen=True)
class KSParams:
    e12: float
    c13: float
    c14: float
    c21: float
    e23: float
    e24: float
    e31: float
    c32: float
    t43: float
    e41: float
    c42: float
    t34: float

    def __post_init__(self):
        _check_positive(self)


@dataclass(frozen=True)
class RPSSLParams:
    cA: float
    eA: float
    cB: float
    eB: float

    def __post_init__(self):
        _check_positive(self)


def make_generic_model(
    a,
    representation: Representation = Representation.EQUIVARIANT_CUBIC,
    orthant_restricted: bool = True,
    name: str = "generic",
) -> NetworkModel:
    return NetworkModel(np.asarray(a, dtype=float), representation, orthant_restricted, name)


def _set(a: np.ndarray, k: int, j: int, value: float) -> None:
    # coefficient of x_k^2 in equation j, 1-based
    a[k - 1, j - 1] = value


def make_gh_model(p: GHParams, orthant_restricted: bool = True) -> NetworkModel:
    a = np.zeros((3, 3))
    _set(a, 2, 1, -p.c21)
    _set(a, 3, 1, p.e31)
    _set(a, 1, 2, p.e12)
    _set(a, 3, 2, -p.c32)
    _set(a, 1, 3, -p.c13)
    _set(a, 2, 3, p.e23)
    return NetworkModel(a, Representation.EQUIVARIANT_CUBIC, orthant_restricted, "gh")


def make_ks_model(p: KSParams, orthant_restricted: bool = True) -> NetworkModel:
    a = np.zeros((4, 4))
    _set(a, 2, 1, -p.c21)
    _set(a, 3, 1, p.e31)
    _set(a, 4, 1, p.e41)
    _set(a, 1, 2, p.e12)
    _set(a, 3, 2, -p.c32)
    _set(a, 4, 2, -p.c42)
    _set(a, 1, 3, -p.c13)
    _set(a, 2, 3, p.e23)
    _set(a, 4, 3, -p.t43)
    _set(a, 1, 4, -p.c14)
    _set(a, 2, 4, p.e24)
    _set(a, 3, 4, -p.t34)
    return NetworkModel(a, Representation.EQUIVARIANT_CUBIC, orthant_restricted, "ks")


def make_rpssl_model(p: RPSSLParams, orthant_restricted: bool = True) -> NetworkModel:
    a = np.zeros((5, 5))
    # equation j: -cA x_{j+1}^2 + eB x_{j+2}^2 - cB x_{j+3}^2 + eA x_{j+4}^2
    for j in range(5):
        for shift, value in ((1, -p.cA), (2, p.eB), (3, -p.cB), (4, p.eA)):
            a[(j + shift) % 5, j] = value
    return NetworkModel(a, Representation.EQUIVARIANT_CUBIC, orthant_restricted, "rpssl")


def _squares(m: NetworkModel, x: np.ndarray) -> np.ndarray:
    return x * x if m.is_cubic else x


def vector_field(m: NetworkModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (m.n,):
        raise ModelError(f"state must have shape ({m.n},), got {x.shape}")
    if m.orthant_restricted and np.any(x < 0):
        raise NegativeCoordinate("orthant-restricted model evaluated at a negative coordinate")
    s = _squares(m, x)
    return x * (1.0 - s.sum() + s @ m.a)


def to_lotka_volterra(m: NetworkModel) -> NetworkModel:
    """Return the Lotka-Volterra form in y = x^2.

    The LV solution at time 2t equals the square of the cubic solution at
    time t.
    """
    if not m.is_cubic:
        raise AlreadyLV("model is already in Lotka-Volterra form")
    return NetworkModel(m.a, Representation.LOTKA_VOLTERRA, True, m.name + "-lv")


LV_TIME_FACTOR = 2.0


def equilibria(m: NetworkModel) -> list[Equilibrium]:
    signs = (1,) if (m.orthant_restricted or not m.is_cubic) else (1, -1)
    out = []
    for sign in signs:
        for j in range(1, m.n + 1):
            x = np.zeros(m.n)
            x[j - 1] = sign
            x.setflags(write=False)
            out.append(Equilibrium(j, sign, x))
    return out


def equilibrium(m: NetworkModel, j: int, sign: int = 1) -> Equilibrium:
    if not 1 <= j <= m.n:
        raise IndexOutOfRange(f"axis index {j} outside 1..{m.n}")
    x = np.zeros(m.n)
    x[j - 1] = sign
    x.setflags(write=False)
    return Equilibrium(j, sign, x)


@dataclass(frozen=True)
class AxisEigenvalues:
    """Jacobian eigenvalues at an axis equilibrium, keyed by 1-based direction.

    ``raw`` are the eigenvalues of the model's own Jacobian.  ``cubic_time``
    expresses them in the time of the equivariant cubic form, which for a
    Lotka-Volterra model means multiplying by the time factor 2.
    """

    axis: int
    raw: dict[int, float]
    cubic_time: dict[int, float]

    @property
    def radial(self) -> float:
        return self.raw[self.axis]


def jacobian_eigenvalues_at(m: NetworkModel, j: int) -> AxisEigenvalues:
    if not 1 <= j <= m.n:
        raise IndexOutOfRange(f"axis index {j} outside 1..{m.n}")
    radial = -2.0 if m.is_cubic else -1.0
    raw = {k: (radial if k == j else float(m.a[j - 1, k - 1])) for k in range(1, m.n + 1)}
    factor = 1.0 if m.is_cubic else LV_TIME_FACTOR
    return AxisEigenvalues(j, raw, {k: factor * v for k, v in raw.items()})
# Reference parameter sets.  KS rows list c34/c43 for the symbols t34/t43.

# Appendix table.  KS rows list c34/c43 for the symbols t34/t43.
PRESET_PARAMS: dict[str, GHParams | KSParams | RPSSLParams] = {
    "gh": GHParams(e12=0.9, c13=1.0, e23=1.5, c21=0.9, e31=0.6, c32=1.2),
    "gh-resonant": GHParams(e12=0.9, c13=0.75, e23=1.5, c21=0.9, e31=0.6, c32=1.2),
    "ks-a": KSParams(e12=0.4, c13=1.5, c14=1.3, c21=1.3, e23=1.9, e24=1.8,
                     e31=1.9, c32=0.8, t34=0.4, e41=1.8, c42=0.8, t43=1.2),
    "ks-b": KSParams(e12=0.7, c13=0.5, c14=0.9, c21=1.6, e23=0.4, e24=1.9,
                     e31=1.4, c32=0.6, t34=0.7, e41=1.9, c42=2.1, t43=0.8),
    "ks-c": KSParams(e12=1.3, c13=1.7, c14=0.7, c21=1.2, e23=1.0, e24=0.5,
                     e31=2.0, c32=1.4, t34=0.5, e41=0.646, c42=0.5, t43=0.7),
    "ks-d": KSParams(e12=0.3, c13=1.1, c14=0.3, c21=0.3, e23=0.9, e24=0.6,
                     e31=1.5, c32=1.5, t34=0.2, e41=0.4, c42=0.8, t43=0.9),
    "rpssl-a": RPSSLParams(cA=1.30, eA=1.00, cB=1.50, eB=0.80),
    "rpssl-b": RPSSLParams(cA=1.10, eA=1.00, cB=2.70, eB=0.80),
    "rpssl-c": RPSSLParams(cA=1.10, eA=1.00, cB=1.80, eB=0.80),
    "rpssl-d": RPSSLParams(cA=1.02, eA=1.00, cB=1.25, eB=0.80),
}

PRESET_ALIASES = {"rpssl-aaaaa": "rpssl-a", "rpssl-aab": "rpssl-b", "rpssl-aabbb": "rpssl-c"}


def resolve_preset_id(preset_id: str) -> str:
    key = preset_id.strip().lower()
    key = PRESET_ALIASES.get(key, key)
    if key not in PRESET_PARAMS:
        raise KeyError(f"unknown preset {preset_id!r}; known: {', '.join(sorted(PRESET_PARAMS))}")
    return key


def make_model(params, orthant_restricted: bool = True) -> NetworkModel:
    if isinstance(params, GHParams):
        return make_gh_model(params, orthant_restricted)
    if isinstance(params, KSParams):
        return make_ks_model(params, orthant_restricted)
    if isinstance(params, RPSSLParams):
        return make_rpssl_model(params, orthant_restricted)
    raise TypeError(f"unsupported parameter set {type(params).__name__}")


def preset_model(preset_id: str, orthant_restricted: bool = True) -> NetworkModel:
    key = resolve_preset_id(preset_id)
    m = make_model(PRESET_PARAMS[key], orthant_restricted)
    return NetworkModel(m.a, m.representation, m.orthant_restricted, key)
