import json
import math

import numpy as np
import pytest

import suitmap


def test_grid_roundtrip(tmp_path):
    values = np.arange(20, dtype=float).reshape(4, 5)
    g = suitmap.RasterGrid(values, cellsize=30.0, xllcorner=100.0)
    assert (g.nrows, g.ncols) == (4, 5)
    path = tmp_path / "g.asc"
    suitmap.write_ascii_grid(g, path)
    back = suitmap.read_ascii_grid(path)
    assert back == g
    np.testing.assert_array_equal(back.to_numpy(), values)
    assert back.cell_x(0) == 115.0


def test_slope_and_distance():
    cols = np.tile(np.arange(7, dtype=float), (7, 1))
    slope = suitmap.slope_degrees(suitmap.RasterGrid(cols)).to_numpy()
    assert np.allclose(slope[1:-1, 1:-1], 45.0, atol=1e-9)
    assert (slope[0] == -9999).all()

    mask = np.zeros((4, 5))
    mask[0, 0] = 1
    d = suitmap.distance_map(suitmap.RasterGrid(mask)).to_numpy()
    assert d[3, 4] == pytest.approx(5.0)

    with pytest.raises(suitmap.SuitmapError, match="source"):
        suitmap.distance_map(suitmap.RasterGrid(np.zeros((3, 3))))


def test_overlay_and_labels():
    a = suitmap.RasterGrid(np.array([[2.0, 4.0], [6.0, 8.0]]))
    b = suitmap.RasterGrid(np.array([[0.0, 2.0], [4.0, 6.0]]))
    s = suitmap.weighted_sum([a, b], ["a", "b"], [0.5, 0.5])
    np.testing.assert_array_equal(s.to_numpy(), [[1, 3], [5, 7]])
    np.testing.assert_array_equal(suitmap.threshold_labels(s, 4.0).to_numpy(), [[0, 0], [1, 1]])
    top = suitmap.extract_candidates(s, top_fraction=0.25)
    assert [(r, c) for _, r, c, _, _ in top] == [(1, 1)]
    with pytest.raises(suitmap.SuitmapError):
        suitmap.extract_candidates(s, cells=[(9, 9)])


def test_reclassify():
    t = suitmap.ReclassTable.continuous([(2.0, 10.0), (None, 0.0)])
    g = suitmap.RasterGrid(np.array([[1.0, 3.0]]))
    np.testing.assert_array_equal(suitmap.reclassify(g, t).to_numpy(), [[10.0, 0.0]])
    cat = suitmap.ReclassTable.categorical({1: 9.0})
    out = suitmap.reclassify(suitmap.RasterGrid(np.array([[1.0, 2.0]])), cat).to_numpy()
    assert out[0, 0] == 9.0 and out[0, 1] == -9999.0


def test_learners_on_separable_data():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(400, 3))
    y = (X[:, 0] > 0).astype(int).tolist()
    s = suitmap.SampleSet(X, y, ["x0", "x1", "x2"])
    train, test = suitmap.train_test_split(s, 0.25, 1)
    cfg = suitmap.ForestConfig()
    cfg.n_trees = 20
    for model in (suitmap.train_tree(train), suitmap.train_forest(train, cfg), suitmap.train_logistic(train)):
        m = suitmap.evaluate(model, test)
        assert m["f1"] > 0.9
        imp = model.importance
        assert max(imp, key=imp.get) == "x0"
        assert math.isclose(sum(imp.values()), 1.0, abs_tol=1e-9)
        p = model.predict_proba(X[:5])
        assert ((p >= 0) & (p <= 1)).all()
        again = suitmap.TrainedModel.from_json(model.to_json())
        np.testing.assert_array_equal(again.predict_proba(X), model.predict_proba(X))

    m = suitmap.metrics_from_confusion(2, 1, 1, 6)
    assert m["accuracy"] == pytest.approx(0.8)
    assert m["f1"] == pytest.approx(2 / 3)


def test_synthetic_pipeline(tmp_path):
    land = suitmap.gen_synthetic_landscape(64, 64, 100.0, 5)
    assert land["dem"].nrows == 64
    assert land["road_mask"].to_numpy().max() == 1.0
    again = suitmap.gen_synthetic_landscape(64, 64, 100.0, 5)
    assert again["dem"] == land["dem"]

    names = ["slope", "road"]
    layers = [
        suitmap.reclassify(suitmap.slope_degrees(land["dem"]),
                           suitmap.ReclassTable.continuous([(2, 10), (5, 8), (10, 5), (None, 0)])),
        suitmap.reclassify(suitmap.distance_map(land["road_mask"]),
                           suitmap.ReclassTable.continuous([(500, 10), (2000, 5), (None, 0)])),
    ]
    for name, grid in zip(names, layers):
        suitmap.write_ascii_grid(grid, tmp_path / f"{name}.asc")
    config = {
        "layers": [{"name": n, "path": f"{n}.asc"} for n in names],
        "sampling": {"n": 600},
        "classifiers": {"tree": {}, "forest": {"n_trees": 10}},
        "iteration": {"max_iters": 1},
    }
    (tmp_path / "cfg.json").write_text(json.dumps(config))
    result = suitmap.run_pipeline(tmp_path / "cfg.json", tmp_path / "out")
    assert result["reweightings"] == 1
    assert math.isclose(sum(result["final_weights"]), 1.0, abs_tol=1e-9)
    assert result["ranked"] > 0
    assert (tmp_path / "out" / "final" / "ranking.csv").exists()
    assert result["winner"].kind in ("tree", "forest")


def test_config_errors(tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"layers": [], "iteration": {"weight_tol": -1}}))
    with pytest.raises(suitmap.ConfigError, match=r"\.layers"):
        suitmap.run_pipeline(tmp_path / "bad.json", tmp_path / "out")
    with pytest.raises(suitmap.SuitmapError, match="cannot read config"):
        suitmap.run_pipeline(tmp_path / "missing.json", tmp_path / "out")
    assert json.loads(suitmap.default_config_json())["iteration"]["max_iters"] == 2
