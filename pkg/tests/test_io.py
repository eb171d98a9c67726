import json

import numpy as np
import pytest

from mrdcsis import __version__
from mrdcsis.errors import ConfigError, IngestionError, ParseError, ReportWriteError
from mrdcsis.io import (
    DatasetManifest,
    atomic_write_text,
    config_hash,
    load_dataset,
    read_report,
    write_report,
)
from mrdcsis.screening import screen


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")


def make_dataset(tmp, missing="drop-sample", response_cols=("r1",), hole=None):
    rng = np.random.default_rng(0)
    samples = [f"s{k}" for k in range(5)]
    resp_rows = [[s] + [f"{v:.6f}" for v in rng.normal(size=5)] for s in samples]
    write_csv(tmp / "resp.csv", ["id", "r1", "r2", "r3", "r4", "r5"], resp_rows)
    a_rows = [[s] + [f"{v:.6f}" for v in rng.normal(size=3)] for s in samples + ["extra"]]
    b_rows = [[s] + [f"{v:.6f}" for v in rng.normal(size=3)] for s in reversed(samples)]
    if hole is not None:
        r, c = hole
        a_rows[r][c] = "NA"
    write_csv(tmp / "a.csv", ["sample", "A", "C", "B"], a_rows)
    write_csv(tmp / "b.csv", ["sample", "B", "C", "D"], b_rows)
    manifest = {
        "response": {"path": "resp.csv", "id_col": "id", "columns": list(response_cols)},
        "platforms": [{"path": "a.csv", "id_col": "sample"}, {"path": "b.csv", "id_col": "sample"}],
        "missing": missing,
    }
    (tmp / "manifest.json").write_text(json.dumps(manifest))
    return tmp / "manifest.json"


def test_feature_and_sample_intersection(tmp_path):
    X, Y, features = load_dataset(DatasetManifest.from_json(make_dataset(tmp_path)))
    assert X.shape == (5, 2, 2)
    assert Y.shape == (5, 1)
    assert features == ["B", "C"]


def test_alignment_by_sample_id(tmp_path):
    m = make_dataset(tmp_path)
    X, _, _ = load_dataset(DatasetManifest.from_json(m))
    b = np.genfromtxt(tmp_path / "b.csv", delimiter=",", skip_header=1, usecols=(1, 2))
    # b.csv lists samples in reverse; row 0 of X is s0, the last row of b.csv
    np.testing.assert_array_equal(X[0, :, 1], b[-1])


def test_five_response_columns(tmp_path):
    m = make_dataset(tmp_path, response_cols=("r1", "r2", "r3", "r4", "r5"))
    _, Y, _ = load_dataset(DatasetManifest.from_json(m))
    assert Y.shape == (5, 5)


def test_all_response_columns_by_default(tmp_path):
    m = make_dataset(tmp_path, response_cols=())
    _, Y, _ = load_dataset(DatasetManifest.from_json(m))
    assert Y.shape == (5, 5)


def test_missing_drop_sample(tmp_path):
    m = make_dataset(tmp_path, hole=(2, 3))  # sample s2, feature B
    X, Y, features = load_dataset(DatasetManifest.from_json(m))
    assert X.shape == (4, 2, 2) and Y.shape == (4, 1)
    assert features == ["B", "C"]


def test_missing_drop_feature(tmp_path):
    m = make_dataset(tmp_path, missing="drop-feature", hole=(2, 3))
    X, _, features = load_dataset(DatasetManifest.from_json(m))
    assert X.shape == (5, 1, 2)
    assert features == ["C"]


def test_missing_on_dropped_column_is_harmless(tmp_path):
    m = make_dataset(tmp_path, hole=(2, 1))  # feature A is not shared
    X, _, _ = load_dataset(DatasetManifest.from_json(m))
    assert X.shape == (5, 2, 2)


def test_alignment_idempotent(tmp_path):
    X, Y, features = load_dataset(DatasetManifest.from_json(make_dataset(tmp_path)))
    out = tmp_path / "aligned"
    out.mkdir()
    ids = [f"s{k}" for k in range(5)]
    write_csv(out / "y.csv", ["id", "y"], [[s, repr(float(v))] for s, v in zip(ids, Y[:, 0])])
    for k in range(2):
        write_csv(out / f"p{k}.csv", ["id"] + features, [[s] + [repr(float(v)) for v in X[i, :, k]] for i, s in enumerate(ids)])
    man = {
        "response": {"path": "y.csv", "id_col": "id"},
        "platforms": [{"path": "p0.csv", "id_col": "id"}, {"path": "p1.csv", "id_col": "id"}],
    }
    X2, Y2, f2 = load_dataset(DatasetManifest.from_dict(man, base_dir=out))
    assert X2.tobytes() == X.tobytes() and Y2.tobytes() == Y.tobytes() and f2 == features


def test_non_numeric_cell_reports_position(tmp_path):
    m = make_dataset(tmp_path)
    text = (tmp_path / "b.csv").read_text().splitlines()
    cells = text[3].split(",")
    cells[2] = "oops"
    text[3] = ",".join(cells)
    (tmp_path / "b.csv").write_text("\n".join(text) + "\n")
    with pytest.raises(ParseError, match=r"row 4, column 'C'"):
        load_dataset(DatasetManifest.from_json(m))


def test_empty_sample_intersection(tmp_path):
    m = make_dataset(tmp_path)
    write_csv(tmp_path / "b.csv", ["sample", "B"], [["zz", 1.0]])
    with pytest.raises(IngestionError, match="sample"):
        load_dataset(DatasetManifest.from_json(m))


def test_empty_feature_intersection(tmp_path):
    m = make_dataset(tmp_path)
    write_csv(tmp_path / "b.csv", ["sample", "Q"], [[f"s{k}", 1.0] for k in range(5)])
    with pytest.raises(IngestionError, match="feature"):
        load_dataset(DatasetManifest.from_json(m))


def test_duplicate_sample_id(tmp_path):
    m = make_dataset(tmp_path)
    write_csv(tmp_path / "b.csv", ["sample", "B"], [["s0", 1.0], ["s0", 2.0]])
    with pytest.raises(IngestionError, match="duplicate"):
        load_dataset(DatasetManifest.from_json(m))


def test_missing_data_file(tmp_path):
    m = make_dataset(tmp_path)
    (tmp_path / "a.csv").unlink()
    with pytest.raises(IngestionError):
        load_dataset(DatasetManifest.from_json(m))


def test_manifest_errors(tmp_path):
    with pytest.raises(ConfigError):
        DatasetManifest.from_json(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        DatasetManifest.from_json(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        DatasetManifest.from_dict({"response": {"path": "r.csv", "id_col": "id"}, "platforms": []})
    with pytest.raises(ConfigError):
        DatasetManifest.from_dict({"platforms": [{"path": "a", "id_col": "id"}]})
    with pytest.raises(ConfigError):
        DatasetManifest.from_dict(
            {"response": {"path": "r", "id_col": "id"}, "platforms": [{"path": "a", "id_col": "id"}], "missing": "impute"}
        )


def _report():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 12))
    return screen(X, X[:, 4] + 0.1 * rng.normal(size=40), "top:3", feature_names=[f"g{j}" for j in range(12)])


def test_report_round_trip(tmp_path):
    rep = _report()
    json_path, csv_path = write_report(rep, tmp_path / "out" / "run", {"a": 1})
    data = read_report(tmp_path / "out" / "run")
    assert data["scores"] == rep.scores.tolist()
    assert data["ranking"] == rep.ranking.tolist()
    assert data["selected"] == rep.selected.tolist()
    assert data["version"] == __version__
    assert data["config_hash"] == config_hash({"a": 1})
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "rank,index,feature,score"
    assert len(rows) - 1 == rep.p
    assert rows[1].startswith("1,4,g4,")
    assert float(rows[1].split(",")[3]) == rep.scores[4]
    assert json_path.suffix == ".json"


def test_report_bytes_reproducible(tmp_path):
    a, _ = write_report(_report(), tmp_path / "a.json")
    b, _ = write_report(_report(), tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_config_hash_stable():
    assert config_hash({"x": 1, "y": [1, 2]}) == config_hash({"y": [1, 2], "x": 1})
    assert config_hash({"x": 1}) != config_hash({"x": 2})


def test_atomic_write_failure_leaves_nothing(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ReportWriteError, match="file"):
        atomic_write_text(blocker / "sub" / "r.json", "{}")
    target = tmp_path / "dir"
    target.mkdir()
    with pytest.raises(ReportWriteError):
        atomic_write_text(target, "{}")  # cannot replace a directory
    assert [p.name for p in target.iterdir()] == []
    assert sorted(p.name for p in tmp_path.iterdir()) == ["dir", "file"]
