"""JSON and CSV encodings of the library's records.

JSON numbers use Python's shortest round-trip ``repr``; CSV numbers use 17
significant digits.  Both re-parse to the same doubles.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Optional

import numpy as np

from .analysis import Family, FixedPointRecord, StabilityClass
from .simplex_core import CubicCoefficients, ModelParameters, SimplexPoint

CSV_HEADER = ("n", "x", "y", "z")


def dumps(obj) -> str:
    """Deterministic JSON text (fixed key order, trailing newline)."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def fmt17(v: float) -> str:
    return format(float(v), ".17g")


def fixed_point_to_dict(rec: FixedPointRecord) -> dict:
    return {
        "name": rec.name,
        "kind": rec.kind,
        "coordinates": list(rec.location.as_tuple()) if rec.location else None,
        "family": rec.family.to_dict() if rec.family else None,
        "eigenvalues": [[w.real, w.imag] for w in rec.eigenvalues] if rec.eigenvalues else None,
        "stability": rec.stability.value if rec.stability else None,
        "case": rec.case,
        "member_of": list(rec.member_of),
        "coincides_with": rec.coincides_with,
    }


def fixed_point_from_dict(data: dict) -> FixedPointRecord:
    eigs = data["eigenvalues"]
    return FixedPointRecord(
        name=data["name"],
        kind=data["kind"],
        location=SimplexPoint(*data["coordinates"]) if data["coordinates"] is not None else None,
        family=Family.from_dict(data["family"]) if data["family"] is not None else None,
        eigenvalues=tuple(complex(re, im) for re, im in eigs) if eigs is not None else None,
        stability=StabilityClass(data["stability"]) if data["stability"] is not None else None,
        case=data["case"],
        member_of=tuple(data["member_of"]),
        coincides_with=data["coincides_with"],
    )


def coefficients_to_json(coeffs: CubicCoefficients) -> str:
    """Nested list ``P[i-1][j-1][k-1]`` for the 1-based coefficient P_{ij,k}."""
    return dumps({"indexing": "P[i-1][j-1][k-1] = P_{ij,k}, i,j,k in 1..3", "P": coeffs.to_nested()})


def coefficients_from_json(text: str) -> CubicCoefficients:
    return CubicCoefficients.from_nested(json.loads(text)["P"])


def params_from_json(data: dict) -> ModelParameters:
    return ModelParameters(**{k: float(data[k]) for k in "abcd"})


def trajectory_csv(states: np.ndarray, indices: Optional[Iterable[int]] = None) -> str:
    """Rows ``n,x,y,z`` with LF endings and no quoting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_NONE)
    writer.writerow(CSV_HEADER)
    idx = range(len(states)) if indices is None else indices
    for n in idx:
        row = states[n]
        writer.writerow([n, fmt17(row[0]), fmt17(row[1]), fmt17(row[2])])
    return buf.getvalue()


def read_trajectory_csv(text: str) -> tuple[list[int], np.ndarray]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    ns, rows = [], []
    for rec in reader:
        ns.append(int(rec[0]))
        rows.append([float(v) for v in rec[1:4]])
    return ns, np.array(rows).reshape(-1, 3)
