"""Small datasets shipped with the package: the worked example and the CSRankings top 10."""

import json
from importlib import resources

from ..geometry import ReasonableChanges
from ..problem import load_problem

NAMES = ("universities", "csrankings")


def _read(name: str) -> bytes:
    return resources.files(__name__).joinpath(name).read_bytes()


def fixture_path(name: str) -> str:
    return str(resources.files(__name__).joinpath(name))


def fixture_sources(name: str) -> tuple[bytes, str, str, dict]:
    """Raw ``(csv_bytes, func_json, id_column, rc_by_attribute)`` of a fixture."""
    index = json.loads(_read("index.json"))
    if name not in index:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(index)}")
    entry = index[name]
    return _read(entry["data"]), _read(entry["func"]).decode(), entry["id_column"], entry["rc"]


def load_fixture(name: str):
    """Return ``(dataset, spec, default_rc)`` for a shipped fixture."""
    raw, func, id_column, rc = fixture_sources(name)
    d, spec = load_problem(raw, func, id_column)
    rc = ReasonableChanges([rc[a] for a in d.schema.names])
    return d, spec, rc
