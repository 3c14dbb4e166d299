"""Reading and writing model files.

A model file is JSON (or TOML on interpreters that ship ``tomllib``) with
fields:

    states  array of state labels (strings); order fixes the indexing
    q       row-major rate matrix, nonnegative off-diagonals, zero row sums
    f       observable values, one per state
    nu      optional initial distribution; defaults to a point mass on the
            first state
    seed    optional integer, used as the default seed by the command line

Numbers are written back with 17 significant digits so a save/load round
trip reproduces the doubles exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .markov import MJPModel, make_model


@dataclass(frozen=True)
class ModelFile:
    model: MJPModel
    labels: list[str]
    seed: int | None


def _load_raw(path: str) -> dict:
    text = open(path, "rb").read()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError as exc:
            raise ParseError(path, "TOML input needs Python >= 3.11") from exc
        try:
            return tomllib.loads(text.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(path, f"invalid TOML: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, f"invalid JSON: {exc}") from exc


def read_model_file(path: str) -> ModelFile:
    raw = _load_raw(path)
    if not isinstance(raw, dict):
        raise ParseError(path, "top level must be a table/object")
    for key in ("states", "q", "f"):
        if key not in raw:
            raise ParseError(path, f"missing required field {key!r}")
    labels = [str(s) for s in raw["states"]]
    n = len(labels)
    if len(set(labels)) != n:
        raise ParseError(path, "state labels must be distinct")
    try:
        q = np.asarray(raw["q"], dtype=float)
        f = np.asarray(raw["f"], dtype=float)
        nu = raw.get("nu")
        if nu is not None:
            nu = np.asarray(nu, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(path, f"numeric field malformed: {exc}") from exc
    if q.shape != (n, n):
        raise ParseError(path, f"field 'q' must be {n}x{n}, got {q.shape}")
    if f.shape != (n,):
        raise ParseError(path, f"field 'f' must have length {n}")
    if nu is not None and nu.shape != (n,):
        raise ParseError(path, f"field 'nu' must have length {n}")
    seed = raw.get("seed")
    if seed is not None:
        if not isinstance(seed, int):
            raise ParseError(path, "field 'seed' must be an integer")
    try:
        model = make_model(q, f, nu)
    except ValidationError as exc:
        raise ParseError(path, str(exc)) from exc
    return ModelFile(model=model, labels=labels, seed=seed)


def load_model(path: str) -> MJPModel:
    """Parse, validate, and assemble a model: irreducible, pi computed, f centered."""
    return read_model_file(path).model


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_model(mf: ModelFile, path: str) -> None:
    """Write the normalized model back out; numeric fields carry 17 digits."""
    model = mf.model
    lines = ["{"]
    lines.append('  "states": ' + json.dumps(mf.labels) + ",")
    rows = [
        "    [" + ", ".join(_fmt(v) for v in row) + "]" for row in model.q.rates
    ]
    lines.append('  "q": [\n' + ",\n".join(rows) + "\n  ],")
    lines.append('  "f": [' + ", ".join(_fmt(v) for v in model.f.values) + "],")
    nu_line = '  "nu": [' + ", ".join(_fmt(v) for v in model.nu.weights) + "]"
    if mf.seed is not None:
        nu_line += ","
        lines.append(nu_line)
        lines.append(f'  "seed": {mf.seed}')
    else:
        lines.append(nu_line)
    lines.append("}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
