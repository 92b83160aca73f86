"""Smoke tests for the python bindings (run under ctest or pytest)."""

import math
import os
import sys

import numpy as np

sys.path.insert(0, os.environ.get("SPARSELAB_MODULE_DIR", "."))

import _sparselab as sl  # noqa: E402


def test_generators_deterministic():
    a = sl.gaussian_unit_columns(8, 16, 3)
    b = sl.gaussian_unit_columns(8, 16, 3)
    assert a.shape == (8, 16)
    assert np.array_equal(a, b)
    assert np.allclose(np.linalg.norm(a, axis=0), 1.0, atol=1e-12)


def test_rip_matches_coherence():
    phi = sl.gaussian_unit_columns(8, 14, 5)
    gram = phi.T @ phi
    np.fill_diagonal(gram, 0.0)
    report = sl.delta_k(phi, 2)
    assert abs(report["delta"] - np.abs(gram).max()) < 1e-10
    assert len(report["witness"]) == 2


def test_solvers_recover_planted_signal():
    phi = sl.gaussian_unit_columns(16, 24, 7)
    x = np.zeros(24)
    x[3], x[11] = 0.8, -0.6
    y = phi @ x

    for result in (sl.omp(y, phi, 2), sl.iht(y, phi, 2)):
        assert result["support"] == [3, 11]
        assert np.linalg.norm(result["estimate"] - x) < 1e-6

    ista = sl.ista(y, phi, 1e-3, max_iterations=3000)
    top2 = np.argsort(-np.abs(ista["estimate"]))[:2]
    assert sorted(top2.tolist()) == [3, 11]


def test_brute_force_oracle():
    phi = sl.gaussian_unit_columns(8, 12, 9)
    y = 0.7 * phi[:, 4]
    values, support = sl.brute_force_l0(y, phi, 2)
    assert support == [4]
    assert abs(values[4] - 0.7) < 1e-10


def test_hard_threshold_tie_rule():
    out = sl.hard_threshold(np.array([2.0, -2.0]), 1)
    assert out.tolist() == [2.0, 0.0]
    gated = sl.gated_hard_threshold(np.array([5.0, 1.0, 3.0, 2.0]), 1, [1], [0])
    assert gated.tolist() == [0.0, 1.0, 3.0, 0.0]


def test_weighted_iht_with_cor3_transform():
    rp = sl.rank_perturbed(10, 30, 0.01, 1, 3)
    w, d = sl.cor3_transform(
        rp["dictionary"], rp["perturbation"], rp["epsilon"], rp["norm_scales"]
    )
    assert np.abs(w @ rp["perturbation"]).max() < 1e-10
    x = np.zeros(30)
    x[17] = 0.5
    y = rp["dictionary"] @ x
    result = sl.weighted_iht(y, rp["dictionary"], w, d, 1)
    assert result["support"] == [17]


def test_aiht_on_clustered_model():
    cd = sl.clustered(24, 8, 6, 0.01, 11)
    x = np.zeros(48)
    x[7], x[20], x[41] = 0.9, -0.5, 0.4  # clusters 1, 3, 6
    y = cd["dictionary"] @ x
    result = sl.aiht_clustered(
        y, 24, 8, 6, 0.01, 11, k_x=3, k_c=3, tau=30, t_detail=4000
    )
    assert result["support"] == [7, 20, 41]


def test_network_train_and_save(tmp_path=None):
    phi = sl.gaussian_unit_columns(8, 16, 13)
    rng = np.random.default_rng(0)
    targets = np.zeros((16, 600))
    for i in range(600):
        targets[rng.choice(16, 2, replace=False), i] = 1.0
    inputs = phi @ targets  # unit-amplitude signals
    net = sl.init_network(8, 16, depth=4, hidden=24, seed=1)
    losses = sl.train_network(
        net, inputs, targets, batch_size=50, initial_lr=1.0,
        weight_decay=1e-6, total_epochs=10, drop_period_epochs=100, seed=2,
    )
    assert losses[-1] < losses[0]

    p = net.forward(inputs[:, :5])
    assert p.shape == (16, 5)
    assert p.min() >= 0.0 and p.max() <= 1.0

    path = "/tmp/sparselab_py_model.ckpt"
    net.save(path)
    loaded = sl.load_network(path)
    assert np.array_equal(loaded.forward(inputs[:, :5]), p)


def test_stereo_projector():
    rig = sl.make_rig(10, 5)
    projector = sl.nullspace_dictionary(rig)
    assert projector.shape == (7, 10)
    assert np.abs(projector @ rig).max() < 1e-12
    assert sl.angular_error_deg(np.array([0.0, 0, 1]), np.array([0.0, 0, 1])) == 0.0


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"PASS {name}")
            except Exception as err:  # noqa: BLE001
                failures += 1
                print(f"FAIL {name}: {err}")
    sys.exit(failures)
