"""Acceptance criteria, one marked group per criterion.

The terminal summary (see conftest.py) prints one PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest

from oceanqso import ModelParameters, derive_coefficients, make_point
from oceanqso import analysis as an
from oceanqso import dynamics as dyn
from oceanqso.operators import ReducedPoint, apply, raw_step
from oceanqso.simplex_core import check_l_volterra, check_stochastic_conditions, point_from_reduced

import sampling

VERTEX = (0.0, 0.0, 1.0)


def _named(params):
    return {r.name: r for r in an.enumerate_fixed_points(params)}


def _grid_array(n):
    return np.array([p.as_tuple() for p in dyn.barycentric_grid(n)])


# --- 1 --------------------------------------------------------------------------------


@pytest.mark.criterion(1, "first worked example: four orbits after 100 steps")
@pytest.mark.parametrize(
    "start, want",
    [
        ((0.1, 0.6), (0.0476346, 0.666636)),
        ((0.02, 0.68), (0.0475566, 0.666789)),
        ((0.05, 0.68), (0.0476215, 0.666662)),
        ((0.07, 0.66), (0.0476302, 0.666645)),
    ],
)
def test_first_example_orbits(case_31, start, want):
    traj = dyn.iterate(case_31, point_from_reduced(*start), 100)
    x, y, _ = traj.states[-1]
    assert abs(x - want[0]) <= 1e-4
    assert abs(y - want[1]) <= 1e-4


# --- 2 --------------------------------------------------------------------------------


@pytest.mark.criterion(2, "first worked example: coexistence point exact and attracting")
def test_first_example_coexistence_point(case_31):
    rec = _named(case_31)[an.COEXISTENCE]
    want = (1 / 21, 2 / 3, 2 / 7)
    assert max(abs(u - v) for u, v in zip(rec.location.as_tuple(), want)) <= 1e-15
    assert rec.stability == an.StabilityClass.ATTRACTING
    mus = an.coexistence_eigenvalue_formula(case_31)
    assert max(abs(u - v) for u, v in zip(rec.eigenvalues, mus)) <= 1e-10


# --- 3 --------------------------------------------------------------------------------


@pytest.mark.criterion(3, "second worked example: orbits reach (1/4, 1/2)")
@pytest.mark.parametrize("start", [(0.26, 0.48), (0.22, 0.52), (0.24, 0.52), (0.29, 0.48)])
def test_second_example_orbits(case_32, start):
    traj = dyn.iterate(case_32, point_from_reduced(*start), 100)
    x, y, _ = traj.states[-1]
    assert abs(x - 0.25) <= 1e-4
    assert abs(y - 0.5) <= 1e-4


@pytest.mark.criterion(3, "second worked example: orbits reach (1/4, 1/2)")
def test_second_example_fixed_point(case_32):
    lam2 = _named(case_32)[an.COEXISTENCE].location
    assert max(abs(u - v) for u, v in zip(lam2.as_tuple(), (0.25, 0.5, 0.25))) <= 1e-15
    assert max(abs(u - v) for u, v in zip(apply(case_32, lam2).as_tuple(), lam2.as_tuple())) <= 1e-15


# --- 4 --------------------------------------------------------------------------------


@pytest.mark.criterion(4, "c < a: the whole simplex drains to (0,0,1)")
def test_uptake_below_recycling_drains_to_vertex(rng):
    pts = _grid_array(30)
    for _ in range(6):
        params = sampling.c_less_a(rng)
        a, b, c, d = params.as_tuple()
        assert c < a and c * d * (c + d) != 0
        res = dyn.converge_batch(params, pts, tol=1e-9, max_iter=10**6)
        assert res.converged.all()
        assert res.iterations.max() <= 10**6
        # the step criterion stops within a few tol of the limit; 1e-6 identifies it
        assert np.abs(res.limits - VERTEX).max() <= 1e-6


# --- 5 --------------------------------------------------------------------------------


@pytest.mark.criterion(5, "c > a, d < b: basins of the zooplankton-free point and the vertex")
def test_saddle_basins(rng):
    grid = dyn.barycentric_grid(30)
    interior = [p for p in grid if min(p.as_tuple()) > 0]
    edge_y0 = [p for p in grid if p.y == 0.0]
    for _ in range(6):
        params = sampling.saddle(rng)
        a, b, c, d = params.as_tuple()
        assert c > a and d < b and b != 0
        lam1 = np.array([0.0, 1.0 - a / c, a / c])
        res = dyn.converge_batch(params, np.array([p.as_tuple() for p in interior]))
        assert res.converged.all()
        assert np.abs(res.limits - lam1).max() <= 1e-6
        res = dyn.converge_batch(params, np.array([p.as_tuple() for p in edge_y0]))
        assert res.converged.all()
        assert np.abs(res.limits - VERTEX).max() <= 1e-6


# --- 6 --------------------------------------------------------------------------------

# one instance per line of the limit table for cd(c+d) = 0
TABLE = [
    (1, (0.0, 0.0, 0.0, 0.0), (0.2, 0.3, 0.5)),
    (2, (0.4, 0.0, 0.0, 0.0), (0.2, 0.3, 0.5)),
    (3, (0.0, 0.4, 0.0, 0.0), (0.2, 0.3, 0.5)),
    (4, (0.3, 0.4, 0.0, 0.0), (0.2, 0.3, 0.5)),
    (5, (0.0, 0.0, 0.0, 0.5), (0.2, 0.3, 0.5)),
    (6, (0.0, 0.0, 0.0, -0.5), (0.2, 0.3, 0.5)),
    (7, (0.0, 0.4, 0.0, 0.3), (0.2, 0.3, 0.5)),
    (7, (0.0, 0.4, 0.0, -0.3), (0.2, 0.3, 0.5)),
    (8, (0.4, 0.0, 0.0, 0.3), (0.2, 0.3, 0.5)),
    (8, (0.4, 0.0, 0.0, -0.6), (0.2, 0.3, 0.5)),
    (9, (0.2, 0.0, 0.8, 0.0), (0.1, 0.6, 0.3)),
    (9, (0.6, 0.0, 0.8, 0.0), (0.5, 0.3, 0.2)),
    (10, (0.4, 0.0, -0.3, 0.0), (0.2, 0.3, 0.5)),
    (11, (0.5, 0.3, 0.2, 0.0), (0.2, 0.3, 0.5)),
    (11, (0.2, 0.3, 0.8, 0.0), (0.4, 0.0, 0.6)),
    (12, (0.2, 0.3, 0.8, 0.0), (0.2, 0.3, 0.5)),
    (13, (0.5, 0.3, 0.2, -0.2), (0.2, 0.3, 0.5)),
    (14, (0.5, 0.0, 0.2, -0.2), (0.2, 0.3, 0.5)),
    (15, (0.2, 0.3, 0.6, -0.6), (0.4, 0.0, 0.6)),
    (16, (0.2, 0.0, 0.6, -0.6), (0.4, 0.0, 0.6)),
    (17, (0.2, 0.3, 0.6, -0.6), (0.3, 0.3, 0.4)),
    (17, (0.2, 0.0, 0.6, -0.6), (0.3, 0.3, 0.4)),
]


@pytest.mark.criterion(6, "degenerate limit table: every line")
@pytest.mark.parametrize("line, params, start", TABLE)
def test_degenerate_table_line(line, params, start):
    params = ModelParameters(*params)
    p0 = make_point(*start)
    assert an.regime(params).degenerate
    # the table dispatcher itself, before the fixed-start shortcut
    pred = dyn._degenerate_prediction(params, p0)
    assert pred.theorem_case.startswith(f"degenerate[{line}]")
    res = dyn.converge(params, p0)
    assert res.converged
    if pred.kind == dyn.FAMILY:
        assert pred.family.contains(res.point, 1e-6)
    else:
        assert res.point.distance(pred.point) <= 1e-6
    # the public entry point agrees on the limit
    public = dyn.predict_limit(params, p0)
    if public.point is not None and pred.point is not None:
        assert public.point.distance(pred.point) <= 1e-12


@pytest.mark.criterion(6, "degenerate limit table: every line")
def test_degenerate_table_is_complete():
    assert {line for line, _, _ in TABLE} == set(range(1, 18))


# --- 7 --------------------------------------------------------------------------------


@pytest.mark.criterion(7, "structural properties")
def test_tensor_equivalence_on_grid(rng):
    pts = [p for p in dyn.barycentric_grid(8)]
    pts += [make_point(*sampling.interior_point(rng)) for _ in range(5)]
    assert len(pts) == 50
    for _ in range(20):
        params = sampling.valid_params(rng)
        P = derive_coefficients(params).P
        for p in pts:
            v = np.array(p.as_tuple())
            via = np.einsum("ijk,i,j->k", P, v, v)
            assert np.abs(via - apply(params, p).as_tuple()).max() <= 1e-12


@pytest.mark.criterion(7, "structural properties")
def test_mass_conservation_over_long_runs(rng):
    for _ in range(5):
        params = sampling.valid_params(rng)
        x, y, z = sampling.interior_point(rng)
        for _ in range(10**4):
            nx, ny, nz = raw_step(x, y, z, params)
            assert abs((nx + ny + nz) - (x + y + z)) <= 1e-14
            x, y, z = nx, ny, nz


@pytest.mark.criterion(7, "structural properties")
def test_jacobian_finite_differences(rng):
    h = 1e-5
    for _ in range(200):
        params = sampling.valid_params(rng)
        x, y, _ = sampling.interior_point(rng, margin=1e-3)
        J = an.jacobian_reduced(params, ReducedPoint(x, y))
        fd = np.empty((2, 2))
        for col, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            hi = raw_step(x + dx, y + dy, 1.0 - x - y - dx - dy, params)
            lo = raw_step(x - dx, y - dy, 1.0 - x - y + dx + dy, params)
            fd[:, col] = [(hi[0] - lo[0]) / (2 * h), (hi[1] - lo[1]) / (2 * h)]
        assert np.abs(J - fd).max() <= 1e-6


@pytest.mark.criterion(7, "structural properties")
def test_stochastic_and_two_volterra(rng):
    for _ in range(1000):
        params = sampling.valid_params(rng)
        P = derive_coefficients(params)
        assert check_stochastic_conditions(P).ok
        # a = b = 0 has probability zero here; that tensor is 3-Volterra instead
        assert check_l_volterra(P, 2)


@pytest.mark.criterion(7, "structural properties")
def test_no_two_cycles_on_grid():
    d = np.linspace(-1.0, 1.0, 100)
    z = np.linspace(0.0, 1.0, 100)
    D, Z = np.meshgrid(d, z)
    disc = np.vectorize(an.two_periodic_discriminant)(D, Z)
    assert (disc < 0).all()


def _members(rng, draw_params, flag, n_points=1000):
    """Random members of an invariant set and the parameters they belong to."""
    out = []
    while len(out) < n_points:
        params = draw_params(rng)
        for v in rng.dirichlet((1, 1, 1), 200):
            p = make_point(*v)
            if getattr(an.invariant_set_membership(params, p), flag):
                out.append((params, p))
    return out[:n_points]


def _saddle_with(sign):
    def draw(rng):
        while True:
            params = sampling.valid_params(rng)
            a, b, c, d = params.as_tuple()
            if c > a and d < b and (c + d >= 0) == (sign >= 0):
                return params

    return draw


@pytest.mark.criterion(7, "structural properties")
@pytest.mark.parametrize(
    "flag, draw",
    [
        ("E", _saddle_with(+1)),
        ("F", _saddle_with(-1)),
        ("H", lambda r: sampling.d_zero(r, ("b>0,c>a", "b=0,c>0")[int(r.integers(2))])),
    ],
)
def test_invariant_set_closure(rng, flag, draw):
    members = _members(rng, draw, flag)
    assert len(members) == 1000
    for params, p in members:
        image = apply(params, p)
        assert getattr(an.invariant_set_membership(params, image, tol=1e-12), flag)


@pytest.mark.criterion(7, "structural properties")
def test_face_closure(rng):
    for _ in range(1000):
        params = sampling.valid_params(rng)
        t = float(rng.uniform())
        assert apply(params, make_point(0.0, t, 1.0 - t)).x == 0.0
        assert apply(params, make_point(t, 0.0, 1.0 - t)).y == 0.0


# --- 8 --------------------------------------------------------------------------------

SUBCASES = {
    an.LINEAR: ("ab>0", "a>0,b=0", "a=0,b>0"),
    an.C_ZERO_D_NONZERO: ("ab>0", "a=b=0", "a=0,b>0", "a>0,b=0"),
    an.D_ZERO_C_NONZERO: ("b>0,c>a", "b>0,c<=a", "b=0,c>0", "b=0,c<0"),
    an.C_EQUALS_MINUS_D: ("b>0,c>a", "b>0,c<=a", "b=0,c>a", "b=0,c<=a"),
}


def _regime_draws(rng, name, n):
    sampler = sampling.REGIME_SAMPLERS[name]
    subs = SUBCASES.get(name)
    if subs is None:
        return [sampler(rng) for _ in range(n)]
    return [sampler(rng, subs[i % len(subs)]) for i in range(n)]


@pytest.mark.criterion(8, "regularity: every grid orbit converges in every regime")
def test_regularity_sweep(rng):
    start = time.perf_counter()
    total = 0
    for name in an.ALL_REGIMES:
        for params in _regime_draws(rng, name, 5):
            assert an.regime(params).name == name
            report = dyn.regularity_sweep(params, 30)
            assert report.n_points == 496
            assert report.n_not_converged == 0, (name, params)
            assert report.all_passed, (name, params)
            total += report.n_points
    elapsed = time.perf_counter() - start
    assert total == 496 * 5 * len(an.ALL_REGIMES)
    assert elapsed < 60.0, f"sweep took {elapsed:.1f}s"


# --- 9 --------------------------------------------------------------------------------


def _lam1_degenerate_b(rng):
    a = float(rng.uniform(0.05, 0.6))
    c = float(rng.uniform(a + 0.1, 1.0 + a))
    d = float(rng.uniform(0.1, 1.0 - a))
    return ModelParameters(a, d * (1.0 - a / c), c, d)


def _lam2_meets_lam1(rng):
    # dyadic values keep cd - ad - bc exactly zero in floating point
    c = float(rng.choice([0.5, 1.0]))
    a = int(rng.integers(1, 16)) * c / 32
    d = int(rng.integers(1, 32)) * (1.0 - a) / 32
    d = np.ldexp(np.round(np.ldexp(d, 10)), -10)
    return ModelParameters(a, d * (c - a) / c, c, d)


def _lam2_b_equals_d(rng):
    b = float(rng.uniform(0.1, 0.9))
    c = float(rng.uniform(0.1, 1.0))
    return ModelParameters(0.0, b, c, b)


def _lam2_b_zero(rng):
    a = float(rng.uniform(0.0, 0.6))
    return ModelParameters(a, 0.0, float(rng.uniform(a + 0.1, 1.0 + a)), float(rng.uniform(0.1, 1.0 - a)))


def _lam2_c_equals_a(rng):
    a = float(rng.uniform(0.1, 0.8))
    return ModelParameters(a, 0.0, a, float(rng.uniform(0.05, 1.0 - a)))


def _vertex_c_equals_a(rng):
    return sampling.boundary(rng, "c=a")


NH = an.StabilityClass.NONHYPERBOLIC
ATT = an.StabilityClass.ATTRACTING
SAD = an.StabilityClass.SADDLE

CLASSIFICATION = [
    ("vertex a>c", an.NUTRIENT_VERTEX, sampling.c_less_a, ATT),
    ("vertex a<c", an.NUTRIENT_VERTEX, sampling.saddle, SAD),
    ("vertex a<c", an.NUTRIENT_VERTEX, sampling.interior, SAD),
    ("vertex b=0", an.NUTRIENT_VERTEX, lambda r: sampling.d_zero(r, "b=0,c>0"), NH),
    ("vertex b=0", an.NUTRIENT_VERTEX, lambda r: sampling.c_minus_d(r, "b=0,c<=a"), NH),
    ("vertex a=c", an.NUTRIENT_VERTEX, _vertex_c_equals_a, NH),
    ("zooplankton-free b>d(1-a/c)", an.ZOOPLANKTON_FREE, sampling.saddle, ATT),
    ("zooplankton-free b>d(1-a/c)", an.ZOOPLANKTON_FREE, lambda r: sampling.interior(r, False), ATT),
    ("zooplankton-free b<d(1-a/c)", an.ZOOPLANKTON_FREE, sampling.interior, SAD),
    ("zooplankton-free b=d(1-a/c)", an.ZOOPLANKTON_FREE, _lam1_degenerate_b, NH),
    ("zooplankton-free a=c", an.ZOOPLANKTON_FREE, _vertex_c_equals_a, NH),
    ("coexistence attracting box", an.COEXISTENCE, sampling.interior, ATT),
    ("coexistence b=0", an.COEXISTENCE, _lam2_b_zero, NH),
    ("coexistence cd-ad-bc=0", an.COEXISTENCE, _lam2_meets_lam1, NH),
    ("coexistence b=d", an.COEXISTENCE, _lam2_b_equals_d, NH),
    ("coexistence c<=a", an.COEXISTENCE, _lam2_c_equals_a, NH),
]


@pytest.mark.criterion(9, "stability classification of the three named points")
@pytest.mark.parametrize(
    "label, name, draw, expected", CLASSIFICATION, ids=[c[0] for c in CLASSIFICATION]
)
def test_classification(rng, label, name, draw, expected):
    for _ in range(50):
        params = draw(rng)
        rec = _named(params).get(name)
        assert rec is not None, (label, params)
        assert rec.stability == expected, (label, params, rec.eigenvalues)
        assert an.classify_fixed_point(params, rec) == expected
        assert an.proposition_case(params, name)[1] == expected
