"""Fixed points, linear stability and parameter regimes.

All fixed points are available in closed form, so nothing here does root
finding.  Solving ``V(p) = p`` gives, besides ``(0, 0, 1)``:

* ``(0, 1 - a/c, a/c)`` whenever ``c != 0`` and ``0 <= a/c <= 1``;
* ``((cd - ad - bc) / (d (c + d)), b/d, (a - b + d) / (c + d))`` when those
  coordinates are admissible;
* continua: the whole simplex (all rates zero), the edge ``x = 0`` (a = c = 0),
  the edge ``y = 0`` (b = 0) and the segment ``z = a/c`` (b = d = 0, c > a).

The three isolated candidates are always reported under fixed names, even when
they sit inside a continuum, so that their eigenvalues stay available.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .operators import ReducedPoint, apply_unchecked
from .simplex_core import ModelParameters, SimplexPoint, require_admissible

UNIT_CIRCLE_BAND = 1e-10

NUTRIENT_VERTEX = "nutrient_vertex"
ZOOPLANKTON_FREE = "zooplankton_free"
COEXISTENCE = "coexistence"

WHOLE_SIMPLEX = "whole_simplex"
EDGE_X0 = "edge_x0"
EDGE_Y0 = "edge_y0"
NUTRIENT_LEVEL = "nutrient_level"


class StabilityClass(str, Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    SADDLE = "saddle"
    NONHYPERBOLIC = "nonhyperbolic"


_COORDS = ("x", "y", "z")


@dataclass(frozen=True)
class Family:
    """A one-parameter (or, for the whole simplex, two-parameter) set of states.

    ``fixed`` pins one coordinate to a value; ``free`` names the coordinate that
    runs over ``free_range``; the remaining coordinate follows from the sum.
    """

    name: str
    fixed: Optional[str]
    value: Optional[float]
    free: Optional[str]
    free_range: tuple[float, float] = (0.0, 1.0)
    description: str = ""

    def contains(self, p: SimplexPoint, tol: float = 1e-12) -> bool:
        if self.fixed is None:
            return True
        return abs(getattr(p, self.fixed) - self.value) <= tol

    def point_at(self, t: float) -> SimplexPoint:
        """Member whose free coordinate equals ``t``."""
        if self.fixed is None:
            raise ValueError("the whole simplex has no single free coordinate")
        coords = {self.fixed: self.value, self.free: t}
        rest = next(k for k in _COORDS if k not in coords)
        coords[rest] = max(0.0, 1.0 - self.value - t)
        return SimplexPoint(coords["x"], coords["y"], coords["z"])

    def sample(self, n: int, rng: np.random.Generator) -> list[SimplexPoint]:
        if self.fixed is None:
            return [SimplexPoint(*map(float, v)) for v in rng.dirichlet((1.0, 1.0, 1.0), n)]
        lo, hi = self.free_range
        ts = np.concatenate([[lo, hi], rng.uniform(lo, hi, max(n - 2, 0))])[:n]
        return [self.point_at(float(t)) for t in ts]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "fixed": self.fixed,
            "value": self.value,
            "free": self.free,
            "free_range": list(self.free_range),
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Family":
        return cls(
            name=data["name"],
            fixed=data["fixed"],
            value=data["value"],
            free=data["free"],
            free_range=tuple(data["free_range"]),
            description=data.get("description", ""),
        )


@dataclass(frozen=True)
class FixedPointRecord:
    name: str
    kind: str  # "isolated" or "family"
    location: Optional[SimplexPoint] = None
    family: Optional[Family] = None
    eigenvalues: Optional[tuple[complex, complex]] = None
    stability: Optional[StabilityClass] = None
    case: Optional[str] = None
    member_of: tuple[str, ...] = field(default=())
    coincides_with: Optional[str] = None

    def contains(self, p: SimplexPoint, tol: float = 1e-12) -> bool:
        if self.kind == "family":
            return self.family.contains(p, tol)
        return self.location.distance(p) <= tol


def edge_x0_family() -> Family:
    return Family(EDGE_X0, "x", 0.0, "y", (0.0, 1.0), "all (0, y, 1-y), y in [0,1]")


def edge_y0_family() -> Family:
    return Family(EDGE_Y0, "y", 0.0, "x", (0.0, 1.0), "all (x, 0, 1-x), x in [0,1]")


def nutrient_level_family(a: float, c: float) -> Family:
    level = a / c if a else 0.0
    return Family(
        NUTRIENT_LEVEL,
        "z",
        level,
        "x",
        (0.0, 1.0 - level),
        "all (x, 1-x-a/c, a/c), x in [0, 1-a/c]",
    )


def whole_simplex_family() -> Family:
    return Family(WHOLE_SIMPLEX, None, None, None, (0.0, 1.0), "every point of the simplex")


def zooplankton_free_point(params: ModelParameters) -> Optional[SimplexPoint]:
    a, c = params.a, params.c
    if c == 0.0:
        return None
    level = a / c if a else 0.0
    if not 0.0 <= level <= 1.0:
        return None
    return SimplexPoint(0.0, 1.0 - level, level)


def coexistence_exists(params: ModelParameters) -> bool:
    a, b, c, d = params.as_tuple()
    return d > 0 and d >= b and a - b <= c and c >= 0 and c * d - a * d - b * c >= 0


def coexistence_point(params: ModelParameters) -> Optional[SimplexPoint]:
    if not coexistence_exists(params):
        return None
    a, b, c, d = params.as_tuple()
    return SimplexPoint(
        (c * d - a * d - b * c) / (d * (c + d)),
        b / d,
        (a - b + d) / (c + d),
    )


def jacobian_reduced(params: ModelParameters, q: ReducedPoint) -> np.ndarray:
    """Jacobian of the planar map at ``q``."""
    require_admissible(params)
    a, b, c, d = params.as_tuple()
    x, y = q.x, q.y
    return np.array(
        [
            [1.0 - b + d * y, d * x],
            [-(c + d) * y, 1.0 - a + c - (c + d) * x - 2.0 * c * y],
        ]
    )


def eigenvalues_2x2(M) -> tuple[complex, complex]:
    """Roots of ``t^2 - tr(M) t + det(M)``, ordered by real then imaginary part."""
    m = np.asarray(M, dtype=float)
    if m[0, 1] == 0.0 or m[1, 0] == 0.0:
        # triangular: the diagonal is exact, while the quadratic formula would
        # spread a defective double root by sqrt(machine epsilon)
        roots = [complex(m[0, 0]), complex(m[1, 1])]
        roots.sort(key=lambda w: (w.real, w.imag))
        return (roots[0], roots[1])
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        r = math.sqrt(disc)
        roots = [complex((tr - r) / 2.0), complex((tr + r) / 2.0)]
    else:
        r = cmath.sqrt(disc)
        roots = [(tr - r) / 2.0, (tr + r) / 2.0]
    roots.sort(key=lambda w: (w.real, w.imag))
    return (roots[0], roots[1])


def stability_from_eigenvalues(eigs, band: float = UNIT_CIRCLE_BAND) -> StabilityClass:
    moduli = [abs(w) for w in eigs]
    if any(abs(m - 1.0) <= band for m in moduli):
        return StabilityClass.NONHYPERBOLIC
    if all(m < 1.0 for m in moduli):
        return StabilityClass.ATTRACTING
    if all(m > 1.0 for m in moduli):
        return StabilityClass.REPELLING
    return StabilityClass.SADDLE


def proposition_case(params: ModelParameters, name: str) -> tuple[Optional[str], Optional[StabilityClass]]:
    """Inequality-based stability verdict for a named fixed point.

    Returns ``(label, expected_class)``; ``(None, None)`` when the inequality
    table makes no statement (e.g. the zooplankton-free point with c < 0).
    Equalities are tested with the same band as the eigenvalue moduli.
    """
    a, b, c, d = params.as_tuple()
    eps = UNIT_CIRCLE_BAND
    if name == NUTRIENT_VERTEX:
        if abs(b) <= eps or abs(a - c) <= eps:
            return "nutrient_vertex: b=0 or a=c", StabilityClass.NONHYPERBOLIC
        if a > c:
            return "nutrient_vertex: a>c", StabilityClass.ATTRACTING
        return "nutrient_vertex: a<c", StabilityClass.SADDLE
    if name == ZOOPLANKTON_FREE:
        if not (c > 0 and c >= a):
            return None, None
        threshold = d * (1.0 - a / c)
        if abs(a - c) <= eps or abs(b - threshold) <= eps:
            return "zooplankton_free: a=c or b=d(1-a/c)", StabilityClass.NONHYPERBOLIC
        if b > threshold:
            return "zooplankton_free: b>d(1-a/c)", StabilityClass.ATTRACTING
        return "zooplankton_free: b<d(1-a/c)", StabilityClass.SADDLE
    if name == COEXISTENCE:
        if not coexistence_exists(params):
            return None, None
        det = c * d - a * d - b * c
        if abs(b) <= eps or c <= a + eps or abs(det) <= eps or abs(b - d) <= eps:
            return "coexistence: b=0 or c<=a or cd-ad-bc=0 or b=d", StabilityClass.NONHYPERBOLIC
        if c > 0 and c > a and d > b > 0 and det > 0:
            return "coexistence: c>0, c>a, d>b>0, cd-ad-bc>0", StabilityClass.ATTRACTING
        return None, None
    return None, None


def coexistence_eigenvalue_formula(params: ModelParameters) -> tuple[complex, complex]:
    """Closed-form eigenvalues ``(2d - bc +- sqrt(D)) / (2d)`` at the coexistence point."""
    a, b, c, d = params.as_tuple()
    D = b * (b * c * c - 4.0 * d * (c * d - a * d - b * c))
    root = cmath.sqrt(D)
    mus = [(2.0 * d - b * c - root) / (2.0 * d), (2.0 * d - b * c + root) / (2.0 * d)]
    mus = [complex(m) for m in mus]
    mus.sort(key=lambda w: (w.real, w.imag))
    return (mus[0], mus[1])


def _point_record(params, name, location, families, coincides_with=None) -> FixedPointRecord:
    eigs = eigenvalues_2x2(jacobian_reduced(params, ReducedPoint(location.x, location.y)))
    label, _ = proposition_case(params, name)
    member_of = tuple(f.name for f in families if f.contains(location))
    return FixedPointRecord(
        name=name,
        kind="isolated",
        location=location,
        eigenvalues=eigs,
        stability=stability_from_eigenvalues(eigs),
        case=label,
        member_of=member_of,
        coincides_with=coincides_with,
    )


def fixed_point_families(params: ModelParameters) -> list[Family]:
    a, b, c, d = params.as_tuple()
    if a == b == c == d == 0.0:
        return [whole_simplex_family()]
    fams = []
    if a == 0.0 and c == 0.0:
        fams.append(edge_x0_family())
    if b == 0.0:
        fams.append(edge_y0_family())
    if b == 0.0 and d == 0.0 and c > 0.0 and a < c:
        fams.append(nutrient_level_family(a, c))
    return fams


def enumerate_fixed_points(params: ModelParameters) -> list[FixedPointRecord]:
    """All fixed points of the operator, named points first, then continua."""
    require_admissible(params)
    families = fixed_point_families(params)
    records = [_point_record(params, NUTRIENT_VERTEX, SimplexPoint(0.0, 0.0, 1.0), families)]

    lam1 = zooplankton_free_point(params)
    if lam1 is not None:
        same = NUTRIENT_VERTEX if lam1.y == 0.0 else None
        records.append(_point_record(params, ZOOPLANKTON_FREE, lam1, families, same))

    lam2 = coexistence_point(params)
    if lam2 is not None:
        if lam2.x == 0.0 or params.c * params.d - params.a * params.d - params.b * params.c == 0.0:
            same = ZOOPLANKTON_FREE if lam1 is not None else None
        else:
            same = None
        records.append(_point_record(params, COEXISTENCE, lam2, families, same))

    for fam in families:
        records.append(
            FixedPointRecord(
                name=fam.name,
                kind="family",
                family=fam,
                stability=StabilityClass.NONHYPERBOLIC,
            )
        )
    return records


def classify_fixed_point(params: ModelParameters, fp: FixedPointRecord) -> StabilityClass:
    """Eigenvalue-based class of a fixed point of ``params``.

    Continua are nonhyperbolic by construction (eigenvalue 1 along the set).
    """
    require_admissible(params)
    if fp.kind == "family":
        probe = fp.family.sample(3, np.random.default_rng(0))
        if any(apply_unchecked(params, p).distance(p) > 1e-12 for p in probe):
            raise ValueError(f"family {fp.name!r} is not fixed for these parameters")
        return StabilityClass.NONHYPERBOLIC
    loc = fp.location
    if apply_unchecked(params, loc).distance(loc) > 1e-12:
        raise ValueError(f"{fp.name!r} at {loc.as_tuple()} is not a fixed point of {params.as_tuple()}")
    eigs = eigenvalues_2x2(jacobian_reduced(params, ReducedPoint(loc.x, loc.y)))
    return stability_from_eigenvalues(eigs)


# --- regimes -----------------------------------------------------------------

IDENTITY = "Identity"
LINEAR = "Linear"
C_ZERO_D_NONZERO = "CZeroDNonzero"
D_ZERO_C_NONZERO = "DZeroCNonzero"
C_EQUALS_MINUS_D = "CEqualsMinusD"
GENERIC_C_LESS_A = "Generic-CLessA"
GENERIC_SADDLE = "Generic-Saddle"
GENERIC_INTERIOR = "Generic-Interior"
BOUNDARY = "Boundary"

DEGENERATE_REGIMES = (IDENTITY, LINEAR, C_ZERO_D_NONZERO, D_ZERO_C_NONZERO, C_EQUALS_MINUS_D)
GENERIC_REGIMES = (GENERIC_C_LESS_A, GENERIC_SADDLE, GENERIC_INTERIOR, BOUNDARY)
ALL_REGIMES = DEGENERATE_REGIMES + GENERIC_REGIMES


@dataclass(frozen=True)
class Regime:
    name: str
    subcase: str = ""

    @property
    def degenerate(self) -> bool:
        """True when cd(c+d) = 0."""
        return self.name in DEGENERATE_REGIMES

    def __str__(self) -> str:
        return f"{self.name}[{self.subcase}]" if self.subcase else self.name


def regime(params: ModelParameters) -> Regime:
    """Region of parameter space with uniform fixed-point and limit structure."""
    require_admissible(params)
    a, b, c, d = params.as_tuple()
    if a == b == c == d == 0.0:
        return Regime(IDENTITY)
    if c == 0.0 and d == 0.0:
        if b == 0.0:
            return Regime(LINEAR, "a>0,b=0")
        if a == 0.0:
            return Regime(LINEAR, "a=0,b>0")
        return Regime(LINEAR, "ab>0")
    if c == 0.0:
        sign = "d>0" if d > 0 else "d<0"
        if a == 0.0 and b == 0.0:
            return Regime(C_ZERO_D_NONZERO, f"a=b=0,{sign}")
        if a == 0.0:
            return Regime(C_ZERO_D_NONZERO, f"a=0,b>0,{sign}")
        if b == 0.0:
            return Regime(C_ZERO_D_NONZERO, f"a>0,b=0,{sign}")
        return Regime(C_ZERO_D_NONZERO, f"ab>0,{sign}")
    if d == 0.0:
        if b == 0.0:
            return Regime(D_ZERO_C_NONZERO, "b=0,c>0" if c > 0 else "b=0,c<0")
        return Regime(D_ZERO_C_NONZERO, "b>0,c<=a" if c <= a else "b>0,c>a")
    if c + d == 0.0:
        bpart = "b>0" if b > 0 else "b=0"
        return Regime(C_EQUALS_MINUS_D, f"{bpart},c<=a" if c <= a else f"{bpart},c>a")
    if c < a:
        return Regime(GENERIC_C_LESS_A, "b>0" if b > 0 else "b=0")
    if c > a and d < b:
        return Regime(GENERIC_SADDLE, "b>0" if b > 0 else "b=0")
    if c > a and d > b and b > 0:
        return Regime(GENERIC_INTERIOR)
    if c == a:
        return Regime(BOUNDARY, "c=a")
    if d == b:
        return Regime(BOUNDARY, "d=b")
    return Regime(BOUNDARY, "b=0,d>0")


# --- invariant sets ----------------------------------------------------------


@dataclass(frozen=True)
class InvariantSets:
    """Membership flags; ``None`` where the set is undefined (c = 0)."""

    E: Optional[bool]
    F: Optional[bool]
    H: Optional[bool]
    M1: bool
    M2: bool


def invariant_set_membership(
    params: ModelParameters, p: SimplexPoint, tol: float = 0.0
) -> InvariantSets:
    """Which of the invariant sets contain ``p``.

    E: ``z >= (a + d x)/c``; F: its complement ``z < (a + d x)/c``;
    H: ``z > a/c``; M1: ``x = 0``; M2: ``y = 0``.  ``tol`` widens each test in
    favour of membership, to absorb rounding at the set boundary.
    """
    a, c, d = params.a, params.c, params.d
    m1 = abs(p.x) <= tol
    m2 = abs(p.y) <= tol
    if c == 0.0:
        return InvariantSets(None, None, None, m1, m2)
    bound = (a + d * p.x) / c
    return InvariantSets(
        E=p.z >= bound - tol,
        F=p.z < bound + tol,
        H=p.z > a / c - tol,
        M1=m1,
        M2=m2,
    )


def two_periodic_discriminant(d: float, z: float) -> float:
    """Discriminant of the quadratic whose roots would be genuine 2-cycles of x -> x(1 + d(1-x-z))."""
    return d * d * (z - 1.0) ** 2 - 4.0
