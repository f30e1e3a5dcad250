"""JSON encodings for matrices, states, instruments and Choi matrices.

A matrix is a list of rows, each entry a ``[re, im]`` pair. Parse errors
raise :class:`SchemaError` carrying a path such as
``outcomes[1].kraus[0][2][1]`` to the offending field.
"""

from __future__ import annotations

import json
from numbers import Real
from pathlib import Path

import numpy as np

from infodist.channels import Channel, ChoiMatrix, Instrument
from infodist.errors import SchemaError
from infodist.linalg import DensityMatrix


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, Real):
        raise SchemaError(path, f"expected a real number, got {type(x).__name__}")
    return float(x)


def matrix_from_json(obj, path: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(path, "expected a non-empty list of rows")
    width = None
    rows = []
    for r, row in enumerate(obj):
        rp = f"{path}[{r}]"
        if not isinstance(row, list):
            raise SchemaError(rp, "expected a list of [re, im] entries")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(rp, f"row length {len(row)} differs from first row length {width}")
        vals = []
        for c, entry in enumerate(row):
            ep = f"{rp}[{c}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise SchemaError(ep, "expected a two-element [re, im] list")
            vals.append(complex(_number(entry[0], f"{ep}[0]"), _number(entry[1], f"{ep}[1]")))
        rows.append(vals)
    if width == 0:
        raise SchemaError(path, "rows must be non-empty")
    return np.array(rows, dtype=np.complex128)


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a JSON object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _count(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise SchemaError(path, f"expected a positive integer, got {x!r}")
    return x


def density_to_json(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "matrix": matrix_to_json(rho.matrix)}


def density_from_json(obj) -> DensityMatrix:
    dim = _count(_require(obj, "dim", ""), "dim")
    m = matrix_from_json(_require(obj, "matrix", ""), "matrix")
    if m.shape != (dim, dim):
        raise SchemaError("matrix", f"shape {m.shape} does not match dim {dim}")
    return DensityMatrix.from_matrix(m)


def instrument_to_json(ins) -> dict:
    if isinstance(ins, Channel):
        ins = Instrument.single(ins)
    out = {
        "din": ins.din,
        "dout": ins.dout,
        "outcomes": [
            {"label": label, "kraus": [matrix_to_json(ins.channel.kraus[i]) for i in idx]}
            for label, idx in ins.outcomes
        ],
    }
    if ins.metadata:
        out["metadata"] = dict(ins.metadata)
    return out


def instrument_from_json(obj) -> Instrument:
    din = _count(_require(obj, "din", ""), "din")
    dout = _count(_require(obj, "dout", ""), "dout")
    outcomes = _require(obj, "outcomes", "")
    if not isinstance(outcomes, list) or not outcomes:
        raise SchemaError("outcomes", "expected a non-empty list")
    groups = []
    for n, oc in enumerate(outcomes):
        op = f"outcomes[{n}]"
        label = _require(oc, "label", op)
        if not isinstance(label, str):
            raise SchemaError(f"{op}.label", "expected a string")
        kraus = _require(oc, "kraus", op)
        if not isinstance(kraus, list) or not kraus:
            raise SchemaError(f"{op}.kraus", "expected a non-empty list of matrices")
        mats = []
        for i, k in enumerate(kraus):
            kp = f"{op}.kraus[{i}]"
            m = matrix_from_json(k, kp)
            if m.shape != (dout, din):
                raise SchemaError(kp, f"shape {m.shape} does not match (dout, din) = {(dout, din)}")
            mats.append(m)
        groups.append((label, mats))
    meta = obj.get("metadata") or {}
    return Instrument.from_groups(groups, metadata={str(k): str(v) for k, v in meta.items()})


def choi_to_json(c: ChoiMatrix) -> dict:
    return {"din": c.din, "dout": c.dout, "matrix": matrix_to_json(c.matrix)}


def load_json(path) -> object:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_density(path) -> DensityMatrix:
    return density_from_json(load_json(path))


def load_instrument(path) -> Instrument:
    return instrument_from_json(load_json(path))


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
