import json
import math

import numpy as np
import pytest

import qlustering as q


def two_site(h, gin=1.0, gout=1.0):
    ham = np.array([[0.0, h], [h, 0.0]])
    return q.currents(ham, np.array([1.0]), 1, 0, 1, gamma_in=gin, gamma_out=gout)


def test_two_site_current_closed_form():
    for h, gin, gout in [(0.3, 1.0, 1.0), (1.0, 0.4, 2.0), (2.5, 3.0, 0.5)]:
        rbb = 1.0 / (gout / gin + 2.0 + gout**2 / (4.0 * h * h))
        assert two_site(h, gin, gout)[0] == pytest.approx(gout * rbb, rel=1e-10)


def test_kernel_matches_dense_solve():
    rng = np.random.default_rng(0)
    h = np.zeros((6, 6))
    for i, j in [(0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (2, 4), (3, 5), (2, 5)]:
        h[i, j] = h[j, i] = rng.uniform(-1, 1)
    psi = rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    fast = q.currents(h, psi, 2, 2, 2)
    dense = q.currents(h, psi, 2, 2, 2, dense=True)
    np.testing.assert_allclose(fast, dense, atol=1e-10)
    rho = q.steady_state(h, psi, 2, 2, 2)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert fast.sum() == pytest.approx(rho[0, 0].real, abs=1e-10)


def test_mask_violation_raises():
    h = np.zeros((5, 5))
    h[0, 4] = h[4, 0] = 0.5
    with pytest.raises(q.QlusteringError):
        q.currents(h, np.array([1.0, 0.0]), 2, 1, 2)


def test_fit_is_deterministic_and_monotone():
    states, truth = q.sphere_clusters(3, 4, samples=24, omega=0.05, seed=42)
    assert states.shape == (24, 3)
    a = q.fit(states, hidden=2, clusters=4, max_iters=40, seed=5)
    b = q.fit(states, hidden=2, clusters=4, max_iters=40, seed=5, workers=2)
    assert a["labels"] == b["labels"]
    assert a["cost_trace"] == b["cost_trace"]
    trace = a["cost_trace"]
    assert all(y <= x for x, y in zip(trace, trace[1:]))
    np.testing.assert_allclose(a["currents"].sum(axis=1), 1.0)


def test_metrics():
    assert q.rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert q.rand_index([0, 0, 1, 1], [0, 1, 2, 3]) == pytest.approx(4 / 6)
    assert q.adjusted_rand_index([0, 0, 0], [0, 1, 2]) == 0.0
    assert q.stability([[0, 0, 0, 0, 1, 1, 1, 1], [0, 0, 1, 1, 0, 0, 1, 1]]) == 0.5
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [4.0, 0.0], [6.0, 0.0]])
    assert q.compactness(pts, [0, 0, 1, 1]) == pytest.approx(2.5)
    assert q.dunn_index(pts, [0, 0, 1, 1]) == pytest.approx(1.5)
    assert q.ipr(np.full(10, 1 / math.sqrt(10))) == pytest.approx(10.0)


def test_consensus_and_kmeans():
    runs = [[0, 0, 1, 1, 2, 2], [1, 1, 0, 0, 2, 2], [2, 2, 1, 1, 0, 0]]
    c = q.consensus_matrix(runs)
    assert c.shape == (6, 6)
    assert q.consensus_cluster(c, 3) == [0, 0, 1, 1, 2, 2]
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]])
    labels = q.kmeans(pts, 2, seed=1)["labels"]
    assert labels[0] == labels[1] != labels[2] == labels[3]


def test_runner_round_trip(tmp_path):
    config = {
        "dataset": {"samples": 12},
        "fit": {"clusters": 4, "max_iters": 10},
        "repeats": 2,
        "output_dir": str(tmp_path),
    }
    report = q.run("consensus", config)
    assert report["command"] == "consensus"
    assert len(report["seeds"]) == 2
    assert (tmp_path / "consensus_matrix.csv").exists()
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["aggregate"] == report["aggregate"]


def test_runner_rejects_unknown_keys():
    with pytest.raises(q.ConfigError):
        q.run("fit", {"repeatz": 3})
