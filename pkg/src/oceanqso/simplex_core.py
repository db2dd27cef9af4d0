"""Parameters, simplex states and the cubic coefficient tensor.

The ecosystem operator acts on mass fractions ``(x, y, z)`` of zooplankton,
phytoplankton and nitrogen.  Four rates ``(a, b, c, d)`` define it; the same
map can be written as a quadratic stochastic operator with a 3x3x3 heredity
tensor ``P[i][j][k]``.  Indices are 1-based in documentation and in exported
JSON (the outer list position ``i-1`` holds row ``i``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

# Structural identities (symmetry, row sums) are checked at this tolerance.
STRUCTURAL_TOL = 1e-12
# Drift tolerated in user supplied points before they are rejected.
CONSTRUCTION_TOL = 1e-9
# Negative components above -CLAMP_TOL are treated as rounding noise.
CLAMP_TOL = 1e-12


class InvalidParameters(ValueError):
    """Raised when (a, b, c, d) are outside the region a computation needs."""


class NotOnSimplex(ValueError):
    """Raised when a state is not a probability vector within tolerance."""


def parse_rate(value: str | float | int | Fraction) -> float:
    """Parse a rate given as a decimal or rational string, without locale effects.

    ``"0.25"``, ``"1/6"`` and ``"-3e-2"`` are all accepted; the value is parsed
    exactly and then rounded once to the nearest double.
    """
    if isinstance(value, float):
        return value
    if isinstance(value, (int, Fraction)):
        return float(value)
    text = str(value).strip()
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidParameters(f"cannot parse rate {value!r}") from exc


@dataclass(frozen=True)
class ModelParameters:
    """The four rates of the ecosystem operator.

    a: phytoplankton recycling, b: zooplankton recycling, c: nutrient uptake,
    d: grazing.  Construction does not validate; see :func:`validate_parameters`.
    """

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_strings(cls, a, b, c, d) -> "ModelParameters":
        return cls(parse_rate(a), parse_rate(b), parse_rate(c), parse_rate(d))

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ModelParameters":
        missing = [k for k in "abcd" if values.get(k) is None]
        if missing:
            raise InvalidParameters(f"missing parameter(s): {', '.join(missing)}")
        return cls.from_strings(*(values[k] for k in "abcd"))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def to_dict(self) -> dict[str, float]:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_parameters`.

    ``valid`` refers to the box in which every heredity coefficient is
    non-negative.  ``preserves_simplex`` is the weaker property that the
    operator maps the simplex into itself, which also holds for some rates
    with ``1 + a < c <= (1 + sqrt(a))**2``.
    """

    valid: bool
    violations: tuple[str, ...] = ()
    preserves_simplex: bool = False

    def __bool__(self) -> bool:
        return self.valid


def max_uptake_preserving_simplex(a: float) -> float:
    """Largest ``c`` for which the nitrogen image stays non-negative.

    On the edge ``x = 0`` the new nitrogen fraction is ``c y^2 - (1 + c - a) y + 1``,
    whose minimum over ``[0, 1]`` is non-negative exactly when
    ``c <= (1 + sqrt(a))**2``.
    """
    return (1.0 + math.sqrt(a)) ** 2


def _preserves_simplex(a: float, b: float, c: float, d: float) -> bool:
    return (
        0.0 <= a <= 1.0
        and 0.0 <= b <= 1.0
        and -(1.0 - a) <= c <= max_uptake_preserving_simplex(a)
        and -(1.0 - b) <= d <= 1.0 - a
    )


def validate_parameters(params: ModelParameters) -> ValidationReport:
    """Check the rates against the box of non-negative heredity coefficients.

    The box is the closed region
    ``0<=a<=1, 0<=b<=1, -(1-a)<=c<=1+a, -(1-b)<=d<=1-a``; boundary values count
    as valid.  Invalid input yields a report, never an exception.
    """
    a, b, c, d = params.as_tuple()
    if not all(math.isfinite(v) for v in (a, b, c, d)):
        return ValidationReport(False, ("all parameters must be finite",), False)
    violations = []
    if not 0.0 <= a <= 1.0:
        violations.append("0 <= a <= 1")
    if not 0.0 <= b <= 1.0:
        violations.append("0 <= b <= 1")
    if not -(1.0 - a) <= c <= 1.0 + a:
        violations.append("-(1-a) <= c <= 1+a")
    if not -(1.0 - b) <= d <= 1.0 - a:
        violations.append("-(1-b) <= d <= 1-a")
    return ValidationReport(not violations, tuple(violations), _preserves_simplex(a, b, c, d))


def require_valid(params: ModelParameters) -> None:
    """Raise unless the rates give a non-negative heredity tensor."""
    report = validate_parameters(params)
    if not report.valid:
        raise InvalidParameters(
            f"parameters {params.as_tuple()} violate: {'; '.join(report.violations)}"
        )


def require_admissible(params: ModelParameters) -> None:
    """Raise unless the operator maps the simplex into itself.

    This is what iteration and fixed-point analysis need; it admits every
    valid parameter set plus the strip ``1 + a < c <= (1 + sqrt(a))**2``.
    """
    report = validate_parameters(params)
    if not report.preserves_simplex:
        detail = "; ".join(
            "-(1-a) <= c <= (1+sqrt(a))^2" if v.startswith("-(1-a)") else v
            for v in report.violations
        )
        raise InvalidParameters(
            f"parameters {params.as_tuple()} do not preserve the simplex: {detail}"
        )


@dataclass(frozen=True)
class SimplexPoint:
    """A state (x, y, z) = (zooplankton, phytoplankton, nitrogen) on S^2.

    Build points with :func:`make_point`; the constructor trusts its input.
    """

    x: float
    y: float
    z: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def reduced(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance(self, other: "SimplexPoint") -> float:
        """Sup-norm distance."""
        return max(abs(self.x - other.x), abs(self.y - other.y), abs(self.z - other.z))


def make_point(x: float, y: float, z: float) -> SimplexPoint:
    """Validate and normalise a simplex state.

    Components in ``[-1e-12, 0)`` are clamped to zero; a coordinate sum within
    1e-9 of one is rescaled to one.  Anything else raises :class:`NotOnSimplex`.
    """
    vals = [float(x), float(y), float(z)]
    if not all(math.isfinite(v) for v in vals):
        raise NotOnSimplex(f"non-finite coordinates {tuple(vals)}")
    for i, v in enumerate(vals):
        if v < 0.0:
            if v < -CLAMP_TOL:
                raise NotOnSimplex(f"negative coordinate {v!r} in {tuple(vals)}")
            vals[i] = 0.0
    total = math.fsum(vals)
    if abs(total - 1.0) > CONSTRUCTION_TOL:
        raise NotOnSimplex(f"coordinates {tuple(vals)} sum to {total!r}, not 1")
    if total != 1.0:
        vals = [v / total for v in vals]
    return SimplexPoint(*vals)


def point_from_reduced(x: float, y: float) -> SimplexPoint:
    """Embed a reduced state (x, y) with z = 1 - x - y."""
    z = 1.0 - x - y
    if -CLAMP_TOL <= z < 0.0:
        z = 0.0
    return make_point(x, y, z)


@dataclass(frozen=True)
class CubicCoefficients:
    """Dense 3x3x3 heredity tensor; ``P[i, j, k]`` is 0-based internally."""

    P: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.P, dtype=float)
        if arr.shape != (3, 3, 3):
            raise ValueError(f"coefficient tensor must be 3x3x3, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "P", arr)

    def entry(self, i: int, j: int, k: int) -> float:
        """1-based accessor matching the usual P_{ij,k} notation."""
        return float(self.P[i - 1, j - 1, k - 1])

    def to_nested(self) -> list[list[list[float]]]:
        return self.P.tolist()

    @classmethod
    def from_nested(cls, nested: Sequence) -> "CubicCoefficients":
        return cls(np.asarray(nested, dtype=float))


def derive_coefficients(params: ModelParameters) -> CubicCoefficients:
    """Heredity tensor of the operator with rates ``params``."""
    require_valid(params)
    a, b, c, d = params.as_tuple()
    P = np.zeros((3, 3, 3))

    def put(i, j, k, value):
        P[i - 1, j - 1, k - 1] = value
        P[j - 1, i - 1, k - 1] = value

    put(1, 1, 1, 1.0 - b)
    put(1, 2, 1, (1.0 - b + d) / 2.0)
    put(1, 3, 1, (1.0 - b) / 2.0)

    put(2, 2, 2, 1.0 - a)
    put(1, 2, 2, (1.0 - a - d) / 2.0)
    put(2, 3, 2, (1.0 - a + c) / 2.0)

    put(1, 1, 3, b)
    put(1, 2, 3, (a + b) / 2.0)
    put(1, 3, 3, (1.0 + b) / 2.0)
    put(2, 3, 3, (1.0 + a - c) / 2.0)
    put(2, 2, 3, a)
    put(3, 3, 3, 1.0)
    return CubicCoefficients(P)


@dataclass(frozen=True)
class StochasticReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_stochastic_conditions(
    coeffs: CubicCoefficients, tol: float = STRUCTURAL_TOL
) -> StochasticReport:
    """Nonnegativity, symmetry in (i, j) and unit row sums, all within ``tol``."""
    P = coeffs.P
    violations = []
    for i, j, k in zip(*np.nonzero(P < -tol)):
        violations.append(f"negative P[{i + 1}{j + 1},{k + 1}] = {P[i, j, k]!r}")
    asym = np.abs(P - P.transpose(1, 0, 2))
    for i, j, k in zip(*np.nonzero(asym > tol)):
        if i < j:
            violations.append(
                f"asymmetric P[{i + 1}{j + 1},{k + 1}] != P[{j + 1}{i + 1},{k + 1}]"
            )
    sums = P.sum(axis=2)
    for i, j in zip(*np.nonzero(np.abs(sums - 1.0) > tol)):
        if i <= j:
            violations.append(f"row ({i + 1},{j + 1}) sums to {sums[i, j]!r}")
    return StochasticReport(not violations, tuple(violations))


def check_l_volterra(coeffs: CubicCoefficients, ell: int) -> bool:
    """Test the ell-Volterra zero pattern.

    Coordinates ``k <= ell`` must satisfy ``P_{ij,k} = 0`` for ``k`` not in
    ``{i, j}``; every coordinate ``k > ell`` needs a positive coefficient
    ``P_{ij,k}`` with ``i != k`` and ``j != k``.
    """
    if ell not in (1, 2, 3):
        raise ValueError(f"ell must be 1, 2 or 3, got {ell!r}")
    report = check_stochastic_conditions(coeffs)
    if not report.ok:
        raise ValueError(f"tensor is not stochastic: {report.violations[0]}")
    P = coeffs.P
    for k in range(3):
        cross = [P[i, j, k] for i in range(3) for j in range(3) if i != k and j != k]
        if k < ell:
            if any(v != 0.0 for v in cross):
                return False
        elif not any(v > 0.0 for v in cross):
            return False
    return True
