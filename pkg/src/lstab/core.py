"""Datasets, ranking functions, refinements and position changes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    IntegrityError,
    ParseError,
    RankingError,
    SchemaError,
    TupleNotFound,
    UnsupportedOperation,
)

KINDS = ("linear", "power_geomean", "external")


@dataclass(frozen=True)
class AttributeSchema:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise SchemaError("schema needs at least one attribute")
        if any(not str(a) for a in names):
            raise SchemaError("attribute names must be non-empty")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in {names}")

    @property
    def n(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class DataTuple:
    id: str
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"tuple {self.id!r} has non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Dataset:
    """Ordered, immutable collection of identified tuples.

    ``labels`` carries non-numeric columns (e.g. a display name) keyed by id;
    they take no part in ranking.
    """

    schema: AttributeSchema
    tuples: tuple[DataTuple, ...]
    labels: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        tuples = tuple(self.tuples)
        object.__setattr__(self, "tuples", tuples)
        if not tuples:
            raise IntegrityError("dataset is empty")
        ids = [t.id for t in tuples]
        if len(set(ids)) != len(ids):
            seen = set()
            dup = next(i for i in ids if i in seen or seen.add(i))
            raise IntegrityError(f"duplicate tuple id {dup!r}")
        for t in tuples:
            if len(t.values) != self.schema.n:
                raise DimensionError(
                    f"tuple {t.id!r} has {len(t.values)} values, schema has {self.schema.n}"
                )
        object.__setattr__(self, "_index", {i: k for k, i in enumerate(ids)})
        values = np.array([t.values for t in tuples], dtype=float).reshape(len(tuples), -1)
        values.setflags(write=False)
        object.__setattr__(self, "_values", values)

    @classmethod
    def from_arrays(cls, ids: Sequence, values, names: Sequence[str], labels=None) -> "Dataset":
        values = np.asarray(values, dtype=float)
        tuples = [DataTuple(str(i), row) for i, row in zip(ids, values)]
        return cls(AttributeSchema(tuple(names)), tuple(tuples), labels or {})

    def __len__(self):
        return len(self.tuples)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tuples]

    @property
    def values(self) -> np.ndarray:
        """(len, n) read-only matrix of attribute values in dataset order."""
        return self._values

    def index_of(self, tid: str) -> int:
        try:
            return self._index[tid]
        except KeyError:
            raise TupleNotFound(f"no tuple with id {tid!r}") from None

    def get(self, tid: str) -> DataTuple:
        return self.tuples[self.index_of(tid)]

    def replace(self, new: DataTuple) -> "Dataset":
        """Dataset with the tuple sharing ``new.id`` swapped for ``new``."""
        i = self.index_of(new.id)
        tuples = list(self.tuples)
        tuples[i] = new
        return Dataset(self.schema, tuple(tuples), self.labels)

    def subset(self, ids: Iterable[str]) -> "Dataset":
        return Dataset(self.schema, tuple(self.get(i) for i in ids), self.labels)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", *self.schema.names])
        for t in self.tuples:
            w.writerow([t.id, *(repr(v) for v in t.values)])
        return buf.getvalue()


def _parse_float(cell: str, row: int, col: str) -> float:
    try:
        v = float(cell)
    except (TypeError, ValueError):
        raise ParseError(f"cannot parse {cell!r} as a number", row, col) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {cell!r}", row, col)
    return v


def load_dataset(source, id_column: str, attribute_columns: Sequence[str] | None = None) -> Dataset:
    """Read a dataset from CSV.

    ``source`` may be a path, a binary or text stream, or raw bytes. When
    ``attribute_columns`` is None every column other than the id that parses
    as numeric in all rows is used; remaining columns are kept as labels.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
    text = raw.decode("utf-8-sig") if isinstance(raw, (bytes, bytearray)) else raw

    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames
    if not header:
        raise SchemaError("CSV has no header row")
    rows = list(reader)
    if id_column not in header:
        raise SchemaError(f"missing id column {id_column!r}")

    if attribute_columns is None:
        attribute_columns = []
        for col in header:
            if col == id_column:
                continue
            try:
                for r in rows:
                    if not math.isfinite(float(r[col])):
                        raise ValueError
            except (TypeError, ValueError):
                continue
            attribute_columns.append(col)
    attribute_columns = list(attribute_columns)
    if not attribute_columns:
        raise SchemaError("no attribute columns")
    missing = [c for c in attribute_columns if c not in header]
    if missing:
        raise SchemaError(f"missing attribute columns {missing}")
    schema = AttributeSchema(tuple(attribute_columns))

    label_cols = [c for c in header if c != id_column and c not in attribute_columns]
    tuples, labels, seen = [], {}, set()
    for lineno, r in enumerate(rows, start=2):
        tid = r[id_column]
        if tid is None or tid == "":
            raise ParseError("empty id", lineno, id_column)
        if tid in seen:
            raise IntegrityError(f"duplicate tuple id {tid!r} at row {lineno}")
        seen.add(tid)
        vals = tuple(_parse_float(r[c], lineno, c) for c in attribute_columns)
        tuples.append(DataTuple(tid, vals))
        if label_cols:
            labels[tid] = {c: r[c] for c in label_cols}
    return Dataset(schema, tuple(tuples), labels)


@dataclass(frozen=True)
class RankingFunctionSpec:
    """How tuples are ranked. Higher score means a better (smaller) position.

    Prefer the ``linear``/``power_geomean``/``external`` constructors; they fill
    in the capability flags.
    """

    kind: str
    weights: tuple[float, ...] | None = None
    exponents: tuple[float, ...] | None = None
    offset: float = 1.0
    command: tuple[str, ...] | None = None
    score_based: bool = True
    tuple_independent: bool = True
    monotone: bool = True
    attributes: tuple[str, ...] | None = None
    timeout: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown ranking kind {self.kind!r}")
        if self.kind == "linear":
            if not self.weights:
                raise ConfigError("linear ranking needs weights")
            w = tuple(float(x) for x in self.weights)
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "score_based", True)
            object.__setattr__(self, "tuple_independent", True)
            object.__setattr__(self, "monotone", all(x >= 0 for x in w))
        elif self.kind == "power_geomean":
            if not self.exponents:
                raise ConfigError("power_geomean ranking needs exponents")
            e = tuple(float(x) for x in self.exponents)
            if any(x < 0 for x in e) or sum(e) <= 0:
                raise ConfigError("power_geomean exponents must be non-negative with positive sum")
            object.__setattr__(self, "exponents", e)
            object.__setattr__(self, "offset", float(self.offset))
            object.__setattr__(self, "score_based", True)
            object.__setattr__(self, "tuple_independent", True)
            object.__setattr__(self, "monotone", True)
        else:
            if not self.command:
                raise ConfigError("external ranking needs a command")
            cmd = self.command
            if isinstance(cmd, str):
                cmd = shlex.split(cmd)
            object.__setattr__(self, "command", tuple(cmd))
            if self.score_based:
                raise ConfigError("external rankings only emit an order; score_based must be false")

    @classmethod
    def linear(cls, weights, attributes=None):
        return cls("linear", weights=None if weights is None else tuple(weights), attributes=attributes)

    @classmethod
    def power_geomean(cls, exponents, offset=1.0, attributes=None):
        return cls(
            "power_geomean",
            exponents=None if exponents is None else tuple(exponents),
            offset=offset,
            attributes=attributes,
        )

    @classmethod
    def external(cls, command, tuple_independent=False, monotone=False, timeout=None):
        return cls(
            "external",
            command=command,
            score_based=False,
            tuple_independent=tuple_independent,
            monotone=monotone,
            timeout=timeout,
        )

    @property
    def root(self) -> float:
        return sum(self.exponents)

    @property
    def arity(self) -> int | None:
        params = self.weights or self.exponents
        return len(params) if params else None

    @classmethod
    def from_dict(cls, obj: Mapping) -> "RankingFunctionSpec":
        kind = obj.get("kind")
        attrs = None

        def params(key):
            nonlocal attrs
            p = obj.get(key)
            if isinstance(p, Mapping):
                attrs = tuple(p.keys())
                return tuple(p.values())
            return p

        if kind == "linear":
            return cls.linear(params("weights"), attributes=attrs)
        if kind == "power_geomean":
            exps = params("exponents")
            return cls.power_geomean(exps, obj.get("offset", 1.0), attributes=attrs)
        if kind == "external":
            return cls.external(
                obj.get("command"),
                tuple_independent=bool(obj.get("tuple_independent", False)),
                monotone=bool(obj.get("monotone", False)),
                timeout=obj.get("timeout"),
            )
        raise ConfigError(f"unknown ranking kind {kind!r}")

    @classmethod
    def from_json(cls, source) -> "RankingFunctionSpec":
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                try:
                    obj = json.load(fh)
                except ValueError as exc:
                    raise ConfigError(f"ranking spec file {source!s} is not valid JSON: {exc}") from None
        else:
            try:
                obj = json.loads(source)
            except (TypeError, ValueError):
                raise ConfigError(f"ranking spec is neither an existing file nor JSON: {str(source)[:80]!r}") from None
        if not isinstance(obj, Mapping):
            raise ConfigError("ranking spec must be a JSON object")
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "linear":
            out["weights"] = list(self.weights)
        elif self.kind == "power_geomean":
            out["exponents"] = list(self.exponents)
            out["offset"] = self.offset
        else:
            out["command"] = list(self.command)
        out.update(
            score_based=self.score_based,
            tuple_independent=self.tuple_independent,
            monotone=self.monotone,
        )
        return out

    def check_arity(self, schema: AttributeSchema):
        if self.arity is not None and self.arity != schema.n:
            raise DimensionError(f"ranking function expects {self.arity} attributes, schema has {schema.n}")

    def scores(self, values) -> np.ndarray:
        """Vectorised score over the last axis of ``values``."""
        if not self.score_based:
            raise UnsupportedOperation(f"{self.kind} ranking has no scores")
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.arity:
            raise DimensionError(f"expected {self.arity} attributes, got {values.shape[-1]}")
        if self.kind == "linear":
            return (values * np.asarray(self.weights)).sum(axis=-1)
        base = values + self.offset
        if np.any(base <= 0):
            raise DomainError("power_geomean needs value + offset > 0 for every attribute")
        return np.exp((np.log(base) * np.asarray(self.exponents)).sum(axis=-1) / self.root)


def score_tuple(spec: RankingFunctionSpec, t: DataTuple) -> float:
    return float(spec.scores(np.asarray(t.values)))


@dataclass(frozen=True)
class Ranking:
    order: tuple[str, ...]
    scores: Mapping[str, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "_pos", {tid: i for i, tid in enumerate(self.order)})

    def position(self, tid: str) -> int:
        """0-based position of ``tid``."""
        try:
            return self._pos[tid]
        except KeyError:
            raise TupleNotFound(f"no tuple with id {tid!r}") from None

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)


def run_external(command: Sequence[str], d: Dataset, timeout: float | None = None) -> list[str]:
    """Invoke an external ranking process and return the ids it emits."""
    try:
        proc = subprocess.run(
            list(command),
            input=d.to_csv().encode("utf-8"),
            capture_output=True,
            timeout=timeout,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise RankingError(f"ranking process failed to run: {exc}") from exc
    if proc.returncode != 0:
        err = proc.stderr.decode("utf-8", "replace").strip()
        raise RankingError(f"ranking process exited with status {proc.returncode}: {err}")
    order = [ln.strip() for ln in proc.stdout.decode("utf-8", "replace").splitlines() if ln.strip()]
    expected = set(d.ids)
    if len(order) != len(set(order)):
        raise RankingError("ranking process emitted repeated ids")
    if set(order) != expected:
        missing = sorted(expected - set(order))[:5]
        extra = sorted(set(order) - expected)[:5]
        raise RankingError(f"ranking process output does not match ids (missing {missing}, unknown {extra})")
    return order


def rank_dataset(spec: RankingFunctionSpec, d: Dataset) -> Ranking:
    if not spec.score_based:
        return Ranking(run_external(spec.command, d, spec.timeout))
    spec.check_arity(d.schema)
    scores = spec.scores(d.values)
    ids = d.ids
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    return Ranking([ids[i] for i in order], {ids[i]: float(scores[i]) for i in order})


def apply_refinement(t: DataTuple, eps) -> DataTuple:
    eps = np.asarray(eps, dtype=float).ravel()
    if eps.shape[0] != len(t.values):
        raise DimensionError(f"refinement has {eps.shape[0]} components, tuple has {len(t.values)}")
    return DataTuple(t.id, tuple(np.asarray(t.values) + eps))


def position_change(spec: RankingFunctionSpec, d: Dataset, t: DataTuple, t_new: DataTuple) -> int:
    """Absolute shift in position when ``t`` is replaced by ``t_new``."""
    if t_new.id != t.id:
        raise IntegrityError("replacement must keep the tuple id")
    d.index_of(t.id)
    before = rank_dataset(spec, d).position(t.id)
    after = rank_dataset(spec, d.replace(t_new)).position(t.id)
    return abs(before - after)
