import io
import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import reference as ref
from lstab import (
    DataTuple,
    Dataset,
    RankingFunctionSpec,
    apply_refinement,
    load_dataset,
    position_change,
    rank_dataset,
    score_tuple,
)
from lstab.errors import (
    ConfigError,
    DimensionError,
    DomainError,
    IntegrityError,
    ParseError,
    RankingError,
    SchemaError,
    TupleNotFound,
)

UNIVERSITY_CSV = textwrap.dedent(
    """\
    id,University,AI Pubs.,Systems Pubs.
    t1,Lakefront University,44,36
    t2,Dempster University,42,35
    t3,Western Polytechnic,40,34
    t4,Prairie University,21,27
    t5,Ogden University,25,24
    t6,Kedzie Institute,23,24
    t7,University of Blue Island,18,25
    t8,Plainfield College,7,14
    t9,Irving University,13,11
    t10,Kimball College,6,10
    """
)


def _linear(rows, weights=(1.0, 1.0)):
    names = [f"a{i}" for i in range(len(weights))]
    return Dataset.from_arrays(list(rows), list(rows.values()), names), RankingFunctionSpec.linear(weights)


# --- loading -------------------------------------------------------------------


def test_load_universities_from_bytes():
    d = load_dataset(UNIVERSITY_CSV.encode(), "id", ["AI Pubs.", "Systems Pubs."])
    assert d.schema.n == 2
    assert len(d) == 10
    assert d.get("t1").values == (44.0, 36.0)
    assert d.labels["t1"]["University"] == "Lakefront University"


def test_load_infers_numeric_columns():
    d = load_dataset(io.StringIO(UNIVERSITY_CSV), "id")
    assert d.schema.names == ("AI Pubs.", "Systems Pubs.")


def test_load_from_path(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text(UNIVERSITY_CSV)
    assert load_dataset(str(p), "id").ids[0] == "t1"


def test_empty_attribute_list_is_schema_error():
    with pytest.raises(SchemaError):
        load_dataset(UNIVERSITY_CSV.encode(), "id", [])


def test_missing_columns_are_schema_errors():
    with pytest.raises(SchemaError):
        load_dataset(UNIVERSITY_CSV.encode(), "name")
    with pytest.raises(SchemaError):
        load_dataset(UNIVERSITY_CSV.encode(), "id", ["AI Pubs.", "Theory"])


def test_duplicate_id_is_integrity_error():
    csv = UNIVERSITY_CSV.replace("t4,", "t3,")
    with pytest.raises(IntegrityError):
        load_dataset(csv.encode(), "id", ["AI Pubs.", "Systems Pubs."])


def test_parse_error_reports_row_and_column():
    csv = UNIVERSITY_CSV.replace("t5,Ogden University,25", "t5,Ogden University,lots")
    with pytest.raises(ParseError) as info:
        load_dataset(csv.encode(), "id", ["AI Pubs.", "Systems Pubs."])
    assert info.value.row == 6
    assert info.value.column == "AI Pubs."


def test_csv_roundtrip():
    d = load_dataset(UNIVERSITY_CSV.encode(), "id")
    back = load_dataset(d.to_csv().encode(), "id")
    assert back.ids == d.ids
    assert np.array_equal(back.values, d.values)


def test_values_are_read_only():
    d = load_dataset(UNIVERSITY_CSV.encode(), "id")
    with pytest.raises(ValueError):
        d.values[0, 0] = 1.0


def test_unknown_tuple():
    d = load_dataset(UNIVERSITY_CSV.encode(), "id")
    with pytest.raises(TupleNotFound):
        d.get("t99")


# --- ranking functions ------------------------------------------------------------


def test_power_geomean_universities_row():
    f = RankingFunctionSpec.power_geomean((5, 12))
    assert f.root == 17
    assert score_tuple(f, DataTuple("t1", (44, 36))) == pytest.approx(39.2, abs=0.05)


def test_power_geomean_cmu_row():
    f = RankingFunctionSpec.power_geomean((5, 12, 3, 7))
    assert f.root == 27
    assert score_tuple(f, DataTuple("CMU", (71.4, 11.9, 21.1, 13.8))) == pytest.approx(19.53, abs=0.01)


def test_linear_sum():
    assert score_tuple(RankingFunctionSpec.linear((1, 1)), DataTuple("x", (0.5, 0.5))) == 1.0


@given(st.lists(st.floats(0, 100), min_size=2, max_size=2), st.lists(st.integers(0, 20), min_size=2, max_size=2))
def test_power_geomean_matches_reference(values, exponents):
    if sum(exponents) <= 0:
        return
    f = RankingFunctionSpec.power_geomean(exponents)
    expect = ref.power_geomean(values, exponents)
    assert score_tuple(f, DataTuple("x", values)) == pytest.approx(expect, rel=1e-9)


def test_power_geomean_domain():
    f = RankingFunctionSpec.power_geomean((1, 1))
    with pytest.raises(DomainError):
        score_tuple(f, DataTuple("x", (-2.0, 1.0)))


def test_arity_mismatch():
    d = load_dataset(UNIVERSITY_CSV.encode(), "id")
    with pytest.raises(DimensionError):
        rank_dataset(RankingFunctionSpec.linear((1, 1, 1)), d)


def test_spec_json_with_named_attributes():
    f = RankingFunctionSpec.from_json('{"kind": "power_geomean", "exponents": {"AI Pubs.": 5, "Systems Pubs.": 12}}')
    assert f.attributes == ("AI Pubs.", "Systems Pubs.")
    assert f.exponents == (5.0, 12.0)
    assert RankingFunctionSpec.from_dict(f.to_dict()).exponents == f.exponents


@pytest.mark.parametrize("text", ['{"kind": "cubic"}', '{"kind": "linear"}', "[1, 2]", "not json at all"])
def test_bad_specs_are_config_errors(text):
    with pytest.raises(ConfigError):
        RankingFunctionSpec.from_json(text)


# --- ranking, refinement, position change --------------------------------------------


def test_universities_order(universities):
    d, f, _ = universities
    assert list(rank_dataset(f, d).order) == [f"t{i}" for i in range(1, 11)]


def test_single_tuple_ranking():
    d, f = _linear({"only": (1.0, 2.0)})
    assert rank_dataset(f, d).position("only") == 0


def test_ties_break_by_ascending_id():
    d, f = _linear({"b": (1.0, 1.0), "a": (2.0, 0.0)})
    assert list(rank_dataset(f, d).order) == ["a", "b"]


@settings(max_examples=50)
@given(st.dictionaries(st.text("abcdef", min_size=1, max_size=3), st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=12))
def test_ranking_matches_reference_sort(rows):
    d, f = _linear({k: tuple(map(float, v)) for k, v in rows.items()})
    expect = ref.rank({k: ref.linear(v, (1, 1)) for k, v in rows.items()})
    assert list(rank_dataset(f, d).order) == expect


def test_apply_refinement_examples():
    t1 = DataTuple("t1", (44, 36))
    assert apply_refinement(t1, (-10, 5)).values == (34.0, 41.0)
    assert apply_refinement(t1, (-10, -5)).values == (34.0, 31.0)
    assert apply_refinement(t1, (0, 0)) == t1
    with pytest.raises(DimensionError):
        apply_refinement(t1, (1, 2, 3))


def test_position_change_example(universities):
    d, f, _ = universities
    t1 = d.get("t1")
    refined = apply_refinement(t1, (-10, -5))
    assert score_tuple(f, refined) == pytest.approx(32.9, abs=0.05)
    assert position_change(f, d, t1, refined) == 2
    assert position_change(f, d, t1, t1) == 0


def test_position_change_t10_unchanged(universities):
    # refined score 10.24 stays below t9 (11.03)
    d, f, _ = universities
    t10 = d.get("t10")
    refined = DataTuple("t10", (6, 11))
    assert score_tuple(f, refined) == pytest.approx(10.24, abs=0.005)
    assert position_change(f, d, t10, refined) == 0


def test_position_change_requires_same_id(universities):
    d, f, _ = universities
    with pytest.raises(IntegrityError):
        position_change(f, d, d.get("t1"), DataTuple("t2", (1, 1)))


@settings(max_examples=60)
@given(
    st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=8),
    st.data(),
)
def test_position_change_matches_reference(rows, data):
    rows = {f"r{i}": tuple(map(float, v)) for i, v in enumerate(rows)}
    d, f = _linear(rows)
    tid = data.draw(st.sampled_from(sorted(rows)))
    new = data.draw(st.tuples(st.integers(-3, 9), st.integers(-3, 9)).map(lambda v: tuple(map(float, v))))
    expect = ref.position_change(lambda v: ref.linear(v, (1, 1)), rows, tid, new)
    assert position_change(f, d, d.get(tid), DataTuple(tid, new)) == expect


# --- external ranking process --------------------------------------------------------------

RANKER = """\
import csv, sys
rows = list(csv.DictReader(sys.stdin))
cols = [c for c in rows[0] if c != "id"]
rows.sort(key=lambda r: (-sum(float(r[c]) for c in cols), r["id"]))
mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
if mode == "fail":
    sys.exit(4)
if mode == "dup":
    rows.append(rows[0])
if mode == "drop":
    rows.pop()
for r in rows:
    print(r["id"])
"""


@pytest.fixture
def ranker(tmp_path):
    p = tmp_path / "ranker.py"
    p.write_text(RANKER)
    return lambda mode="ok": RankingFunctionSpec.external([sys.executable, str(p), mode])


def test_external_ranking_matches_linear(ranker):
    d, f = _linear({"a": (1.0, 2.0), "b": (3.0, 3.0), "c": (0.0, 0.5)})
    r = rank_dataset(ranker(), d)
    assert list(r.order) == list(rank_dataset(f, d).order)
    assert r.scores is None


@pytest.mark.parametrize("mode", ["fail", "dup", "drop"])
def test_external_ranking_errors(ranker, mode):
    d, _ = _linear({"a": (1.0, 2.0), "b": (3.0, 3.0), "c": (0.0, 0.5)})
    with pytest.raises(RankingError):
        rank_dataset(ranker(mode), d)


def test_external_position_change(ranker):
    d, _ = _linear({"a": (1.0, 2.0), "b": (3.0, 3.0), "c": (0.0, 0.5)})
    assert position_change(ranker(), d, d.get("c"), DataTuple("c", (9.0, 9.0))) == 2


def test_missing_external_program():
    d, _ = _linear({"a": (1.0, 2.0)})
    with pytest.raises(RankingError):
        rank_dataset(RankingFunctionSpec.external(["/nonexistent/ranker"]), d)
