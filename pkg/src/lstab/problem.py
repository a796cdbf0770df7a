"""Loading a dataset together with its ranking function and RC box."""

from __future__ import annotations

import csv
import io
import os

import numpy as np

from .core import Dataset, RankingFunctionSpec, load_dataset
from .errors import ConfigError, SchemaError
from .geometry import ReasonableChanges


def read_header(raw: bytes) -> list[str]:
    first = raw.decode("utf-8-sig").splitlines()[:1]
    return next(csv.reader(io.StringIO(first[0]))) if first else []


def load_problem(data, func, id_column: str | None = None, attributes=None) -> tuple[Dataset, RankingFunctionSpec]:
    """Read a CSV and a ranking spec, choosing attribute columns consistently.

    Attribute columns come from ``attributes``, else from the keys of the
    spec's weights/exponents when given as an object, else every numeric
    column. The id column defaults to ``id`` when present, else the first.
    """
    if isinstance(data, (str, os.PathLike)):
        with open(data, "rb") as fh:
            raw = fh.read()
    else:
        raw = data
    spec = func if isinstance(func, RankingFunctionSpec) else RankingFunctionSpec.from_json(func)
    header = read_header(raw)
    if not header:
        raise SchemaError("CSV has no header row")
    if id_column is None:
        id_column = "id" if "id" in header else header[0]
    attrs = list(attributes) if attributes else (list(spec.attributes) if spec.attributes else None)
    d = load_dataset(raw, id_column, attrs)
    spec.check_arity(d.schema)
    return d, spec


def parse_rc(text: str, d: Dataset) -> ReasonableChanges:
    """Parse ``attr=value,...`` or ``pct=P`` (P% of each attribute's range).

    Attributes not named get zero width.
    """
    text = text.strip()
    names = d.schema.names
    if text.startswith("pct="):
        try:
            pct = float(text[4:])
        except ValueError:
            raise ConfigError(f"bad RC percentage {text!r}") from None
        spread = d.values.max(axis=0) - d.values.min(axis=0)
        return ReasonableChanges(spread * pct / 100.0)
    out = np.zeros(len(names))
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"bad RC entry {part!r}; expected attr=value")
        key, val = part.rsplit("=", 1)
        key = key.strip()
        if key not in names:
            raise ConfigError(f"RC names unknown attribute {key!r}")
        try:
            out[names.index(key)] = float(val)
        except ValueError:
            raise ConfigError(f"bad RC value {val!r} for {key!r}") from None
    return ReasonableChanges(out)
