"""Evaluation of the ecosystem operator and its lower-dimensional pieces.

``apply`` is the three-coordinate map

    x' = x (1 - b + d y)
    y' = y (1 - a - d x + c z)
    z' = z (1 - c y) + a y + b x

and ``apply_reduced`` the planar map obtained by substituting ``z = 1 - x - y``.
Both are kept separate on purpose so that each can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex_core import (
    CLAMP_TOL,
    STRUCTURAL_TOL,
    CubicCoefficients,
    ModelParameters,
    NotOnSimplex,
    SimplexPoint,
    check_stochastic_conditions,
    require_admissible,
)


class SimplexExcursion(ArithmeticError):
    """An iterate left [0, 1] by more than rounding noise."""


@dataclass(frozen=True)
class ReducedPoint:
    x: float
    y: float

    def __post_init__(self):
        if self.x < 0.0 or self.y < 0.0 or self.x + self.y > 1.0 + STRUCTURAL_TOL:
            raise NotOnSimplex(f"reduced point ({self.x!r}, {self.y!r}) is outside the triangle")

    def embed(self) -> SimplexPoint:
        return SimplexPoint(self.x, self.y, 1.0 - self.x - self.y)


def raw_step(x, y, z, params: ModelParameters):
    """One application of the map without validation or clamping.

    Works elementwise on floats and numpy arrays alike; the operation order is
    fixed so that scalar and vectorised trajectories agree bit for bit.
    """
    a, b, c, d = params.a, params.b, params.c, params.d
    nx = x * (1.0 - b + d * y)
    ny = y * (1.0 - a - d * x + c * z)
    nz = z * (1.0 - c * y) + a * y + b * x
    return nx, ny, nz


def _clamp(v: float) -> float:
    if v < 0.0:
        if v < -CLAMP_TOL:
            raise SimplexExcursion(f"coordinate {v!r} below 0")
        return 0.0
    if v > 1.0:
        if v > 1.0 + CLAMP_TOL:
            raise SimplexExcursion(f"coordinate {v!r} above 1")
        return 1.0
    return v


def clamp_arrays(*arrays: np.ndarray) -> tuple[np.ndarray, ...]:
    """Vectorised counterpart of the scalar clamp; raises on real excursions."""
    out = []
    for arr in arrays:
        if arr.size and (arr.min() < -CLAMP_TOL or arr.max() > 1.0 + CLAMP_TOL):
            raise SimplexExcursion("iterate left the simplex beyond rounding noise")
        out.append(np.clip(arr, 0.0, 1.0))
    return tuple(out)


def apply(params: ModelParameters, p: SimplexPoint) -> SimplexPoint:
    """Image of ``p`` under the operator; the result stays on the simplex."""
    require_admissible(params)
    nx, ny, nz = raw_step(p.x, p.y, p.z, params)
    return SimplexPoint(_clamp(nx), _clamp(ny), _clamp(nz))


def apply_unchecked(params: ModelParameters, p: SimplexPoint) -> SimplexPoint:
    """Same as :func:`apply` for callers that validated ``params`` already."""
    nx, ny, nz = raw_step(p.x, p.y, p.z, params)
    return SimplexPoint(_clamp(nx), _clamp(ny), _clamp(nz))


def apply_via_tensor(coeffs: CubicCoefficients, p: SimplexPoint) -> SimplexPoint:
    """Evaluate ``x'_k = sum_ij P_ij,k x_i x_j`` directly from the tensor."""
    report = check_stochastic_conditions(coeffs)
    if not report.ok:
        raise ValueError(f"tensor is not stochastic: {report.violations[0]}")
    v = p.as_array()
    out = np.einsum("ijk,i,j->k", coeffs.P, v, v)
    return SimplexPoint(*(_clamp(float(t)) for t in out))


def apply_reduced(params: ModelParameters, q: ReducedPoint) -> ReducedPoint:
    """Planar map on ``{x, y >= 0, x + y <= 1}``."""
    require_admissible(params)
    a, b, c, d = params.as_tuple()
    x, y = q.x, q.y
    nx = x * (1.0 - b + d * y)
    ny = y * (1.0 - a + c - (c + d) * x - c * y)
    return ReducedPoint(_clamp(nx), _clamp(ny))


def restriction_f(d: float, z: float, x: float) -> float:
    """Dynamics of x on the line of constant z when a = b = c = 0."""
    if not -1.0 <= d <= 1.0:
        raise ValueError(f"d={d!r} outside [-1, 1]")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"z={z!r} outside [0, 1]")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x!r} outside [0, 1]")
    return x * (1.0 + d * (1.0 - x - z))


def restriction_g(a: float, c: float, x: float, y: float) -> float:
    """Dynamics of y at frozen x when b = d = 0.

    Fixed points are 0 and ``1 - x - a/c``.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a={a!r} outside [0, 1]")
    if not -(1.0 - a) <= c <= 1.0 + a:
        raise ValueError(f"c={c!r} outside [-(1-a), 1+a]")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x!r} outside [0, 1]")
    if not 0.0 <= y <= 1.0 - x + STRUCTURAL_TOL:
        raise ValueError(f"y={y!r} outside [0, 1-x]")
    return y * (1.0 - a + c * (1.0 - x - y))


def restriction_phi(a: float, c: float, y: float) -> float:
    """The map on the zooplankton-free edge x = 0: ``y (1 - a + c - c y)``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a={a!r} outside [0, 1]")
    if not -(1.0 - a) <= c <= 1.0 + a:
        raise ValueError(f"c={c!r} outside [-(1-a), 1+a]")
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y={y!r} outside [0, 1]")
    return y * (1.0 - a + c - c * y)


def z_recursion(
    params: ModelParameters, variant: str, z0: float, z1: float, n: int
) -> list[float]:
    """Nitrogen sequence from the two-step scalar recursions.

    ``variant="z1"`` applies when a = c = 0 and b != 0 (start ``z1 = z + b x``);
    ``variant="z2"`` when b = c = 0 and a != 0 (start ``z1 = z + a y``).
    The result has ``n + 1`` entries ``z0 ... zn``.
    """
    require_admissible(params)
    a, b, c, d = params.as_tuple()
    if n < 0:
        raise ValueError("n must be non-negative")
    if variant == "z1":
        if b == 0.0:
            raise ValueError("recursion z1 divides by b; b must be nonzero")
        if a != 0.0 or c != 0.0:
            raise ValueError("recursion z1 holds only for a = c = 0")
        q = d / b
        k_sq1, k_cross, k_sq0 = -q, (2.0 - b) * q, -(1.0 - b) * q
        k_lin1, k_lin0 = 2.0 - b + d, -(1.0 - b + d)
    elif variant == "z2":
        if a == 0.0:
            raise ValueError("recursion z2 divides by a; a must be nonzero")
        if b != 0.0 or c != 0.0:
            raise ValueError("recursion z2 holds only for b = c = 0")
        q = d / a
        k_sq1, k_cross, k_sq0 = q, -(2.0 - a) * q, (1.0 - a) * q
        k_lin1, k_lin0 = 2.0 - a - d, -(1.0 - a - d)
    else:
        raise ValueError(f"unknown variant {variant!r}; expected 'z1' or 'z2'")

    seq = [float(z0)]
    if n >= 1:
        seq.append(float(z1))
    while len(seq) <= n:
        zp, zc = seq[-2], seq[-1]
        seq.append(
            k_sq1 * zc * zc + k_cross * zc * zp + k_sq0 * zp * zp + k_lin1 * zc + k_lin0 * zp
        )
    return seq
