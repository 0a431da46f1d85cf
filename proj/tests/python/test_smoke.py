import numpy as np
import pytest

import mvne


@pytest.fixture(scope="module")
def graph():
    return mvne.generate({"n": 90, "c": 3, "views": 2, "attr_dim": 6, "p_in": 0.2, "p_out": 0.02, "seed": 4})


def test_generate_shapes(graph):
    assert graph.num_nodes == 90
    assert graph.view_names == ["view0", "view1"]
    assert graph.attributes.shape == (90, 6)
    assert sorted(set(graph.labels.tolist())) == [0, 1, 2]
    edges = graph.edges("view0")
    assert edges.shape[1] == 2
    assert np.all(edges[:, 0] < edges[:, 1])


def test_graph_round_trip(graph, tmp_path):
    graph.save(tmp_path)
    back = mvne.load(tmp_path)
    assert np.array_equal(back.attributes, graph.attributes)
    assert np.array_equal(back.edges("view1"), graph.edges("view1"))
    rebuilt = mvne.Graph(90, {n: graph.edges(n) for n in graph.view_names}, graph.attributes, graph.labels)
    assert np.array_equal(rebuilt.edges("view0"), graph.edges("view0"))


def test_train_and_evaluate(graph):
    cfg = {"trainer.epochs": 5, "model.dim": 8, "encoder.heads": 2, "trainer.seed": 1}
    res = mvne.train(graph, cfg)
    assert res["fused"].shape == (90, 8)
    assert set(res["views"]) == {"view0", "view1"}
    assert res["view_weights"].shape == (90, 2)
    np.testing.assert_allclose(res["view_weights"].sum(axis=1), 1.0, atol=1e-9)
    assert len(res["loss_history"]) == 5
    assert np.all(np.isfinite(res["loss_history"]))
    again = mvne.train(graph, cfg)
    assert np.array_equal(res["fused"], again["fused"])

    rep = mvne.evaluate(res["fused"], graph.labels, runs=3)
    assert rep["runs"] == 3
    assert 0.0 <= rep["nmi"] <= 1.0
    assert rep["micro_f1"] == pytest.approx(np.mean(rep["micro_f1_runs"]))


def test_default_config_matches_cli_defaults():
    cfg = mvne.default_config()
    assert cfg["model.dim"] == "64"
    assert cfg["trainer.lr"] == "0.001"
    assert cfg["objective.tau"] == "0.7"


def test_metric_helpers():
    assert mvne.nmi(np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1])) == pytest.approx(0.0, abs=1e-15)
    macro, micro = mvne.f1_scores(np.array([0, 0, 0, 0]), np.array([0, 0, 1, 1]), 2)
    assert micro == pytest.approx(0.5)
    assert macro == pytest.approx(1 / 3)
    pts = np.vstack([np.zeros((5, 2)), np.full((5, 2), 10.0)])
    labels, inertia = mvne.kmeans(pts, 2)
    assert inertia == 0.0
    assert len(set(labels[:5].tolist())) == 1 and labels[0] != labels[5]
    pred = mvne.logistic_regression(np.array([[-1.0], [-1.0], [1.0], [1.0]]), np.array([0, 0, 1, 1]), np.array([[-2.0], [2.0]]), 2)
    assert pred.tolist() == [0, 1]


def test_errors_map_to_python_exceptions(graph):
    with pytest.raises(mvne.ConfigError, match="p_out < p_in"):
        mvne.generate({"p_in": 0.01, "p_out": 0.5})
    with pytest.raises(mvne.ConfigError):
        mvne.train(graph, {"no.such.key": 1})
    with pytest.raises(mvne.Error):
        mvne.load("/nonexistent/dataset")
    with pytest.raises(mvne.IndexError):
        graph.edges("missing")


def test_cli_in_process(tmp_path):
    spec = tmp_path / "spec.txt"
    spec.write_text("n=60\nc=2\nviews=2\nattr_dim=4\n")
    code, out, err = mvne.run_cli(["gen", str(spec), "--run-dir", str(tmp_path / "data")])
    assert code == 0, err
    assert (tmp_path / "data" / "manifest.json").exists()
    code, _, _ = mvne.run_cli(["train", str(tmp_path / "nowhere")])
    assert code == 3
    assert mvne.table3_variants()[-1] == "CREME"
