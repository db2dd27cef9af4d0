"""Trajectories, convergence detection and limit prediction.

Convergence is declared at the first step ``n`` with

    |p(n+1) - p(n)|_inf <= tol   and   |p(n) - p(max(0, n-16))|_inf <= 10 tol,

the look-back term guarding against slow drift near nonhyperbolic points.  The
engine iterates all requested initial points together as numpy arrays using
the same operation order as :func:`oceanqso.operators.apply`, so batch and
scalar trajectories coincide exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analysis as an
from .analysis import Family, Regime
from .operators import _clamp, clamp_arrays, raw_step
from .simplex_core import ModelParameters, SimplexPoint, make_point, require_admissible

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10**6
LOOKBACK = 16
LOOKBACK_FACTOR = 10.0
_BLOCK = 64


class NotConverged(RuntimeError):
    """A trajectory did not meet the convergence criterion within ``max_iter`` steps."""

    def __init__(self, message: str, result: "ConvergenceResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    point: SimplexPoint
    iterations: int
    last_step: float


@dataclass
class Trajectory:
    params: ModelParameters
    states: np.ndarray  # shape (n + 1, 3)
    converged: bool = False
    limit: Optional[SimplexPoint] = None
    iterations_to_converge: Optional[int] = None

    @property
    def points(self) -> list[SimplexPoint]:
        return [SimplexPoint(*map(float, row)) for row in self.states]

    @property
    def final(self) -> SimplexPoint:
        return SimplexPoint(*map(float, self.states[-1]))

    def __len__(self) -> int:
        return len(self.states)


def _first_converged(states: np.ndarray, tol: float) -> Optional[int]:
    """Index n of the first state meeting the criterion, using p(n+1) from ``states``."""
    if len(states) < 2:
        return None
    step = np.abs(np.diff(states, axis=0)).max(axis=1)
    idx = np.arange(len(states) - 1)
    back = np.abs(states[:-1] - states[np.maximum(idx - LOOKBACK, 0)]).max(axis=1)
    ok = np.nonzero((step <= tol) & (back <= LOOKBACK_FACTOR * tol))[0]
    return int(ok[0]) if ok.size else None


def iterate(
    params: ModelParameters, p0: SimplexPoint, n: int, tol: float = DEFAULT_TOL
) -> Trajectory:
    """The orbit ``p0, V(p0), ..., V^n(p0)``.

    The convergence fields are filled by scanning the stored orbit with the
    same criterion as :func:`converge`.
    """
    require_admissible(params)
    if n < 0:
        raise ValueError("n must be non-negative")
    p0 = make_point(p0.x, p0.y, p0.z)
    states = np.empty((n + 1, 3))
    x, y, z = p0.x, p0.y, p0.z
    states[0] = (x, y, z)
    for i in range(1, n + 1):
        x, y, z = raw_step(x, y, z, params)
        x, y, z = _clamp(x), _clamp(y), _clamp(z)
        states[i] = (x, y, z)
    traj = Trajectory(params, states)
    hit = _first_converged(states, tol)
    if hit is not None:
        traj.converged = True
        traj.iterations_to_converge = hit
        traj.limit = SimplexPoint(*map(float, states[hit]))
    return traj


def iterate_batch(params: ModelParameters, points: np.ndarray, n: int) -> np.ndarray:
    """Orbits of many initial points; returns an array of shape (n + 1, N, 3)."""
    require_admissible(params)
    if n < 0:
        raise ValueError("n must be non-negative")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty((n + 1, len(pts), 3))
    out[0] = pts
    x, y, z = pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy()
    for i in range(1, n + 1):
        x, y, z = clamp_arrays(*raw_step(x, y, z, params))
        out[i, :, 0], out[i, :, 1], out[i, :, 2] = x, y, z
    return out


@dataclass
class BatchResult:
    limits: np.ndarray  # (N, 3): p(n) at detection, or the last iterate
    iterations: np.ndarray  # (N,) int
    converged: np.ndarray  # (N,) bool
    last_step: np.ndarray  # (N,) sup-norm of the last computed step

    def result(self, i: int) -> ConvergenceResult:
        return ConvergenceResult(
            bool(self.converged[i]),
            SimplexPoint(*map(float, self.limits[i])),
            int(self.iterations[i]),
            float(self.last_step[i]),
        )


def converge_batch(
    params: ModelParameters,
    points: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> BatchResult:
    """Run the convergence test for many initial points at once.

    ``points`` has shape (N, 3).  Each column of work is independent; results
    do not depend on the order or grouping of the points.
    """
    require_admissible(params)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 0:
        raise ValueError("max_iter must be non-negative")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    N = len(pts)
    limits = pts.copy()
    iters = np.full(N, max_iter, dtype=np.int64)
    done = np.zeros(N, dtype=bool)
    last = np.full(N, np.inf)

    K = LOOKBACK
    active = np.arange(N)
    # rows 0..K hold p(n0-K) .. p(n0); negative times are padded with p(0)
    buf = np.repeat(pts.T[None, :, :], K + 1 + _BLOCK, axis=0)  # (rows, 3, N)
    n0 = 0
    while active.size and n0 < max_iter:
        B = min(_BLOCK, max_iter - n0)
        x, y, z = buf[K, 0], buf[K, 1], buf[K, 2]
        for r in range(K + 1, K + 1 + B):
            x, y, z = raw_step(x, y, z, params)
            x, y, z = clamp_arrays(x, y, z)
            buf[r, 0], buf[r, 1], buf[r, 2] = x, y, z
        win = buf[: K + 1 + B]
        step = np.abs(win[K + 1 :] - win[K : K + B]).max(axis=1)  # (B, n_active)
        back = np.abs(win[K : K + B] - win[:B]).max(axis=1)
        ok = (step <= tol) & (back <= LOOKBACK_FACTOR * tol)
        hit = ok.any(axis=0)
        if hit.any():
            first = ok.argmax(axis=0)
            cols = np.nonzero(hit)[0]
            rows = first[cols]
            gidx = active[cols]
            limits[gidx] = win[K + rows, :, cols]
            iters[gidx] = n0 + rows
            last[gidx] = step[rows, cols]
            done[gidx] = True
        n0 += B
        keep = ~hit
        # slide the window: last K+1 states become the new history
        buf[: K + 1] = win[B : B + K + 1]
        if not keep.all():
            active = active[keep]
            buf = np.ascontiguousarray(buf[:, :, keep])
    if active.size:
        limits[active] = buf[K].T
        last[active] = np.abs(buf[K] - buf[K - 1]).max(axis=0) if max_iter > 0 else np.inf
        iters[active] = max_iter
    return BatchResult(limits, iters, done, last)


def converge(
    params: ModelParameters,
    p0: SimplexPoint,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ConvergenceResult:
    """Iterate until the orbit settles; a non-converged run is reported, not raised."""
    p0 = make_point(p0.x, p0.y, p0.z)
    batch = converge_batch(params, np.array([p0.as_tuple()]), tol, max_iter)
    res = batch.result(0)
    if not res.converged:
        log.warning("no convergence from %s after %d steps", p0.as_tuple(), max_iter)
    return res


# --- limit prediction --------------------------------------------------------

EXACT = "exact"
FAMILY = "family-with-unknown"
IDENTITY = "identity"
UNPREDICTED = "unpredicted"


@dataclass(frozen=True)
class LimitPrediction:
    """Limit implied by the case analysis for one initial point.

    For ``kind == FAMILY`` the limit lies on ``family`` and its free coordinate
    (the unknown) is left to simulation.
    """

    kind: str
    point: Optional[SimplexPoint] = None
    family: Optional[Family] = None
    theorem_case: str = ""
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "point": list(self.point.as_tuple()) if self.point else None,
            "family": self.family.to_dict() if self.family else None,
            "theorem_case": self.theorem_case,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LimitPrediction":
        return cls(
            kind=data["kind"],
            point=SimplexPoint(*data["point"]) if data["point"] is not None else None,
            family=Family.from_dict(data["family"]) if data["family"] is not None else None,
            theorem_case=data["theorem_case"],
            note=data.get("note", ""),
        )


_VERTEX = SimplexPoint(0.0, 0.0, 1.0)


def _exact(p: SimplexPoint, case: str, note: str = "") -> LimitPrediction:
    return LimitPrediction(EXACT, point=p, theorem_case=case, note=note)


def _lam1(params: ModelParameters) -> SimplexPoint:
    return an.zooplankton_free_point(params)


def _degenerate_prediction(params: ModelParameters, p: SimplexPoint) -> LimitPrediction:
    """First matching line of the cd(c+d) = 0 limit table."""
    a, b, c, d = params.as_tuple()
    x, y, z = p.as_tuple()
    if a == b == c == d == 0.0:
        return LimitPrediction(IDENTITY, point=p, theorem_case="degenerate[1]: a=b=c=d=0")
    if a != 0 and b == c == d == 0:
        return _exact(SimplexPoint(x, 0.0, 1.0 - x), "degenerate[2]: a!=0, b=c=d=0")
    if a == c == d == 0 and b != 0:
        return _exact(SimplexPoint(0.0, y, 1.0 - y), "degenerate[3]: a=c=d=0, b!=0")
    if a != 0 and b != 0 and c == d == 0:
        return _exact(_VERTEX, "degenerate[4]: ab!=0, c=d=0")
    if a == b == c == 0 and d > 0:
        return _exact(SimplexPoint(1.0 - z, 0.0, z), "degenerate[5]: a=b=c=0, d>0")
    if a == b == c == 0 and d < 0:
        return _exact(SimplexPoint(0.0, 1.0 - z, z), "degenerate[6]: a=b=c=0, d<0")
    if a == c == 0 and b != 0 and d != 0:
        return LimitPrediction(
            FAMILY, family=an.edge_x0_family(), theorem_case="degenerate[7]: a=c=0, bd!=0"
        )
    if b == c == 0 and a != 0 and d != 0:
        return LimitPrediction(
            FAMILY, family=an.edge_y0_family(), theorem_case="degenerate[8]: b=c=0, ad!=0"
        )
    if c == 0:
        # c = 0 < a with ab != 0, d != 0: only (0,0,1) is fixed and z is monotone
        return _exact(_VERTEX, "degenerate[+]: c=0, ab!=0, d!=0", "not listed in the table")
    if c > 0 and b == d == 0:
        level = a / c
        if y > 0 and 1.0 - x - level > 0:
            return _exact(
                SimplexPoint(x, 1.0 - x - level, level), "degenerate[9]: c>0, b=d=0"
            )
        return _exact(
            SimplexPoint(x, 0.0, 1.0 - x),
            "degenerate[9]: c>0, b=d=0",
            "y0=0 or 1-x-a/c<=0: the positive fixed point of y is absent",
        )
    if b == d == 0 and c < 0:
        return _exact(SimplexPoint(x, 0.0, 1.0 - x), "degenerate[10]: b=d=0, c<0")
    if d == 0:  # b != 0, c != 0
        if c <= a or y == 0:
            return _exact(
                _VERTEX,
                "degenerate[11]: b!=0, c<=a, d=0, or y=0",
                "'or y=0' read within the d=0, b!=0 case",
            )
        return _exact(_lam1(params), "degenerate[12]: b!=0, c>a, d=0, y>0")
    # c = -d != 0
    if b != 0 and c <= a:
        return _exact(
            _VERTEX, "degenerate[13]: b!=0, c=-d!=0, c<=a", "applied for c<0 as well as 0<c<=a"
        )
    if b == 0 and c <= a:
        return LimitPrediction(
            FAMILY, family=an.edge_y0_family(), theorem_case="degenerate[14]: b=0, c=-d!=0, c<=a"
        )
    if b != 0 and y == 0:
        return _exact(_VERTEX, "degenerate[15]: b!=0, c=-d, a<c, y=0")
    if b == 0 and y == 0:
        return _exact(SimplexPoint(x, 0.0, 1.0 - x), "degenerate[16]: b=0, c=-d, a<c, y=0")
    return _exact(_lam1(params), "degenerate[17]: c=-d, a<c, y>0")


def _generic_prediction(params: ModelParameters, reg: Regime, p: SimplexPoint) -> LimitPrediction:
    a, b, c, d = params.as_tuple()
    x, y, z = p.as_tuple()
    if reg.name == an.GENERIC_C_LESS_A:
        if b > 0:
            return _exact(_VERTEX, "generic[1]: c<a")
        if a == 0 and z == 0:
            return LimitPrediction(
                UNPREDICTED,
                theorem_case="generic[1]: c<a",
                note="b=0, a=0, z0=0: the limit is a vertex of the z=0 edge",
            )
        return LimitPrediction(
            FAMILY,
            family=an.edge_y0_family(),
            theorem_case="generic[1]: c<a",
            note="b=0: every (x,0,1-x) is fixed, so the limit lies on that edge",
        )
    if reg.name == an.GENERIC_SADDLE:
        if y == 0:
            # b = 0 makes the whole edge fixed; that case is caught earlier
            return _exact(_VERTEX, "generic[2]: c>a, d<b, y0=0, b!=0")
        if b > 0 or x == 0:
            return _exact(_lam1(params), "generic[2]: c>a, d<b, y0>0")
        sets = an.invariant_set_membership(params, p)
        if c + d >= 0 and sets.E:
            return _exact(
                _lam1(params),
                "generic[2]: c>a, d<b, y0>0",
                "b=0: start lies in the invariant set z>=(a+dx)/c",
            )
        return LimitPrediction(
            UNPREDICTED,
            theorem_case="generic[2]: c>a, d<b, y0>0",
            note="b=0: the orbit may settle on the fixed edge y=0 instead",
        )
    if reg.name == an.GENERIC_INTERIOR:
        if y == 0:
            return _exact(_VERTEX, "generic[3]: c>a, d>b>0, y0=0")
        if x == 0:
            return _exact(_lam1(params), "generic[3]: c>a, d>b>0, x0=0")
        lam2 = an.coexistence_point(params)
        if lam2 is not None:
            return _exact(
                lam2,
                "generic[3]: c>a, d>b>0, x0!=0, y0!=0",
                "proved locally, verified numerically",
            )
        return _exact(
            _lam1(params),
            "generic[3]: c>a, d>b>0, x0!=0, y0!=0",
            "cd-ad-bc<0: the coexistence point leaves the simplex; the zooplankton-free point attracts",
        )
    return LimitPrediction(UNPREDICTED, theorem_case=f"boundary: {reg.subcase}")


def predict_limit(params: ModelParameters, p0: SimplexPoint) -> LimitPrediction:
    """Limit of the orbit of ``p0`` as implied by the case analysis.

    Initial points that are themselves fixed are returned as their own limit;
    several table lines are silent about such starts (e.g. x0 = 0 when
    a = b = c = 0, d > 0).
    """
    require_admissible(params)
    reg = an.regime(params)
    if reg.name == an.IDENTITY:
        return LimitPrediction(IDENTITY, point=p0, theorem_case="degenerate[1]: a=b=c=d=0")
    nx, ny, nz = raw_step(p0.x, p0.y, p0.z, params)
    if (nx, ny, nz) == p0.as_tuple():
        return _exact(p0, "fixed initial point")
    if reg.degenerate:
        return _degenerate_prediction(params, p0)
    return _generic_prediction(params, reg, p0)


# --- verification ------------------------------------------------------------


@dataclass
class VerificationRecord:
    initial: SimplexPoint
    prediction: LimitPrediction
    converged: bool
    simulated_limit: SimplexPoint
    iterations: int
    passed: bool
    deviation: Optional[float] = None
    unknown_value: Optional[float] = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "initial": list(self.initial.as_tuple()),
            "prediction": self.prediction.to_dict(),
            "converged": self.converged,
            "simulated_limit": list(self.simulated_limit.as_tuple()),
            "iterations": self.iterations,
            "passed": self.passed,
            "deviation": self.deviation,
            "unknown_value": self.unknown_value,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationRecord":
        return cls(
            initial=SimplexPoint(*data["initial"]),
            prediction=LimitPrediction.from_dict(data["prediction"]),
            converged=data["converged"],
            simulated_limit=SimplexPoint(*data["simulated_limit"]),
            iterations=data["iterations"],
            passed=data["passed"],
            deviation=data["deviation"],
            unknown_value=data["unknown_value"],
            message=data["message"],
        )


def _judge(
    p0: SimplexPoint, pred: LimitPrediction, res: ConvergenceResult, tol: float
) -> VerificationRecord:
    lim = res.point
    if not res.converged:
        return VerificationRecord(
            p0, pred, False, lim, res.iterations, False, message="not converged"
        )
    if pred.kind in (EXACT, IDENTITY):
        dev = lim.distance(pred.point)
        return VerificationRecord(
            p0, pred, True, lim, res.iterations, dev <= tol, deviation=dev
        )
    if pred.kind == FAMILY:
        fam = pred.family
        dev = abs(getattr(lim, fam.fixed) - fam.value)
        return VerificationRecord(
            p0,
            pred,
            True,
            lim,
            res.iterations,
            dev <= tol,
            deviation=dev,
            unknown_value=getattr(lim, fam.free),
        )
    return VerificationRecord(
        p0, pred, True, lim, res.iterations, True, message="no prediction; converged"
    )


def verify_prediction(
    params: ModelParameters,
    p0: SimplexPoint,
    tol: float = 1e-6,
    conv_tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> VerificationRecord:
    """Simulate from ``p0`` and compare the limit with :func:`predict_limit`.

    Raises :class:`NotConverged` when the orbit does not settle.
    """
    p0 = make_point(p0.x, p0.y, p0.z)
    pred = predict_limit(params, p0)
    res = converge(params, p0, conv_tol, max_iter)
    if not res.converged:
        raise NotConverged(f"no convergence from {p0.as_tuple()} in {max_iter} steps", res)
    return _judge(p0, pred, res, tol)


def barycentric_grid(n: int) -> list[SimplexPoint]:
    """The (n+1)(n+2)/2 points (i/n, j/n, (n-i-j)/n), vertices and edges included."""
    if n < 1:
        raise ValueError("grid resolution must be at least 1")
    return [
        SimplexPoint(i / n, j / n, (n - i - j) / n)
        for i in range(n + 1)
        for j in range(n + 1 - i)
    ]


def basin_label(
    records: Sequence[an.FixedPointRecord], limit: SimplexPoint, tol: float = 1e-6
) -> str:
    """Name of the fixed point (or continuum) the limit belongs to."""
    for rec in records:
        if rec.kind == "isolated" and rec.coincides_with is None and rec.location.distance(limit) <= tol:
            return rec.name
    for rec in records:
        if rec.kind == "family" and rec.family.contains(limit, tol):
            return rec.name
    return "other"


@dataclass
class SweepReport:
    params: ModelParameters
    regime: str
    grid_n: int
    tol: float
    conv_tol: float
    max_iter: int
    records: list[VerificationRecord] = field(default_factory=list)
    basins: dict[str, int] = field(default_factory=dict)
    basin_of: list[str] = field(default_factory=list)

    @property
    def n_points(self) -> int:
        return len(self.records)

    @property
    def n_converged(self) -> int:
        return sum(r.converged for r in self.records)

    @property
    def n_not_converged(self) -> int:
        return self.n_points - self.n_converged

    @property
    def n_passed(self) -> int:
        return sum(r.passed for r in self.records)

    @property
    def pass_rate(self) -> float:
        return self.n_passed / self.n_points if self.records else 1.0

    @property
    def max_iterations(self) -> int:
        return max((r.iterations for r in self.records if r.converged), default=0)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == self.n_points

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "regime": self.regime,
            "grid_n": self.grid_n,
            "tol": self.tol,
            "conv_tol": self.conv_tol,
            "max_iter": self.max_iter,
            "summary": {
                "points": self.n_points,
                "converged": self.n_converged,
                "not_converged": self.n_not_converged,
                "passed": self.n_passed,
                "pass_rate": self.pass_rate,
                "max_iterations": self.max_iterations,
            },
            "basins": dict(sorted(self.basins.items())),
            "records": [dict(r.to_dict(), basin=b) for r, b in zip(self.records, self.basin_of)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepReport":
        return cls(
            params=ModelParameters(**data["params"]),
            regime=data["regime"],
            grid_n=data["grid_n"],
            tol=data["tol"],
            conv_tol=data["conv_tol"],
            max_iter=data["max_iter"],
            records=[VerificationRecord.from_dict(r) for r in data["records"]],
            basins=dict(data["basins"]),
            basin_of=[r["basin"] for r in data["records"]],
        )


def verify_points(
    params: ModelParameters,
    points: Sequence[SimplexPoint],
    tol: float = 1e-6,
    conv_tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[VerificationRecord]:
    """Batch form of :func:`verify_prediction` that records failures instead of raising."""
    batch = converge_batch(params, np.array([p.as_tuple() for p in points]), conv_tol, max_iter)
    return [
        _judge(p, predict_limit(params, p), batch.result(i), tol) for i, p in enumerate(points)
    ]


def regularity_sweep(
    params: ModelParameters,
    grid_n: int,
    tol: float = 1e-6,
    max_iter: int = DEFAULT_MAX_ITER,
    conv_tol: float = DEFAULT_TOL,
) -> SweepReport:
    """Verify predictions from every point of a barycentric grid."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    require_admissible(params)
    points = barycentric_grid(grid_n)
    records = verify_points(params, points, tol, conv_tol, max_iter)
    fps = an.enumerate_fixed_points(params)
    basin_of = [
        basin_label(fps, r.simulated_limit, tol) if r.converged else "not_converged"
        for r in records
    ]
    basins: dict[str, int] = {}
    for label in basin_of:
        basins[label] = basins.get(label, 0) + 1
    return SweepReport(
        params=params,
        regime=str(an.regime(params)),
        grid_n=grid_n,
        tol=tol,
        conv_tol=conv_tol,
        max_iter=max_iter,
        records=records,
        basins=basins,
        basin_of=basin_of,
    )
