"""Hypothesis strategies for rates and simplex states."""

import math

from hypothesis import strategies as st

from oceanqso import ModelParameters, make_point
from oceanqso.simplex_core import max_uptake_preserving_simplex

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def box_params(draw):
    """Rates inside the closed box of non-negative heredity coefficients."""
    a, b = draw(unit), draw(unit)
    c = draw(st.floats(-(1.0 - a), 1.0 + a))
    d = draw(st.floats(-(1.0 - b), 1.0 - a))
    return ModelParameters(a, b, c, d)


@st.composite
def strip_params(draw):
    """Rates with 1 + a <= c <= (1 + sqrt(a))^2, outside the box but admissible."""
    a, b = draw(unit), draw(unit)
    c = draw(st.floats(1.0 + a, max_uptake_preserving_simplex(a)))
    d = draw(st.floats(-(1.0 - b), 1.0 - a))
    return ModelParameters(a, b, c, d)


simplex_pt = (
    st.tuples(unit, unit, unit)
    .filter(lambda v: sum(v) > 1e-3)
    .map(lambda v: make_point(*(t / math.fsum(v) for t in v)))
)
