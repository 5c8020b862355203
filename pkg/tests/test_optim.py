import numpy as np
import pytest

from vqs.errors import ShapeMismatch
from vqs.optim import (
    AdamState,
    TrainConfig,
    adam_step,
    grad_check,
    init_params,
    load_checkpoint,
    make_batches,
    save_checkpoint,
)


class TestAdam:
    def test_zero_gradient_is_identity(self):
        params = {"w": np.array([1.0, -2.0, 3.0])}
        state = AdamState()
        adam_step(params, {"w": np.zeros(3)}, state)
        adam_step(params, {"w": np.zeros(3)}, state)
        np.testing.assert_array_equal(params["w"], [1.0, -2.0, 3.0])

    def test_first_scalar_step(self):
        # m_hat = v_hat = 1 after one unit-gradient step, so the update is
        # exactly -lr / (1 + eps)
        params = {"t": np.array([0.0])}
        state = AdamState(lr=0.001)
        adam_step(params, {"t": np.array([1.0])}, state)
        expected = -0.001 / (1.0 + 1e-8)
        assert params["t"][0] == pytest.approx(expected, abs=1e-15)
        assert params["t"][0] == pytest.approx(-0.000999999, abs=1e-8)

    def test_deterministic_sequence(self):
        rng = np.random.default_rng(0)
        grads = [rng.standard_normal(4) for _ in range(20)]

        def run():
            p = {"w": np.zeros(4)}
            s = AdamState(lr=0.01)
            for g in grads:
                adam_step(p, {"w": g.copy()}, s)
            return p["w"]

        np.testing.assert_array_equal(run(), run())

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            adam_step({"w": np.zeros(3)}, {"w": np.zeros(4)}, AdamState())


class TestGradCheck:
    def test_quadratic(self):
        def loss(params):
            t = params["t"]
            return 0.5 * float(t @ t), {"t": t.copy()}

        err = grad_check(loss, {"t": np.array([2.0])})
        assert err < 1e-6

    def test_constant(self):
        def loss(params):
            return 3.5, {"t": np.zeros_like(params["t"])}

        assert grad_check(loss, {"t": np.array([1.0, 2.0])}) == 0.0

    def test_detects_wrong_gradient(self):
        def loss(params):
            t = params["t"]
            return 0.5 * float(t @ t), {"t": 2.0 * t}  # analytic off by 2x

        assert grad_check(loss, {"t": np.array([2.0])}) > 1e-2


class TestBatches:
    def test_sizes(self):
        batches = make_batches(5, TrainConfig(batch_size=2, shuffle=False))
        assert [len(b) for b in batches] == [2, 2, 1]

    def test_no_shuffle_identity(self):
        batches = make_batches(5, TrainConfig(batch_size=3, shuffle=False))
        np.testing.assert_array_equal(np.concatenate(batches), np.arange(5))

    def test_same_seed_same_order(self):
        a = make_batches(10, TrainConfig(batch_size=4, seed=3), epoch=2)
        b = make_batches(10, TrainConfig(batch_size=4, seed=3), epoch=2)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_each_index_once(self):
        for epoch in range(3):
            batches = make_batches(13, TrainConfig(batch_size=4, seed=1), epoch=epoch)
            assert sorted(np.concatenate(batches).tolist()) == list(range(13))

    def test_epochs_differ(self):
        a = np.concatenate(make_batches(20, TrainConfig(batch_size=20, seed=1), epoch=0))
        b = np.concatenate(make_batches(20, TrainConfig(batch_size=20, seed=1), epoch=1))
        assert not np.array_equal(a, b)

    def test_bad_batch_size(self):
        with pytest.raises(ShapeMismatch):
            TrainConfig(batch_size=0)


class TestCheckpoint:
    def test_roundtrip_params_only(self, tmp_path):
        params = init_params({"W": (3, 4), "b": (4,)}, seed=5)
        path = tmp_path / "model.vqsp"
        save_checkpoint(path, params)
        loaded, adam = load_checkpoint(path)
        assert adam is None
        assert set(loaded) == {"W", "b"}
        np.testing.assert_allclose(loaded["W"], params["W"], atol=1e-7)

    def test_roundtrip_with_adam(self, tmp_path):
        params = {"w": np.array([1.0, 2.0])}
        state = AdamState(lr=0.25)
        adam_step(params, {"w": np.array([0.5, -0.5])}, state)
        path = tmp_path / "resume.vqsp"
        save_checkpoint(path, params, adam=state)
        _, loaded = load_checkpoint(path)
        assert loaded.step == 1
        assert loaded.lr == pytest.approx(0.25)
        np.testing.assert_allclose(loaded.m["w"], state.m["w"], atol=1e-7)
        np.testing.assert_allclose(loaded.v["w"], state.v["w"], atol=1e-9)

    def test_seeded_init_reproducible(self):
        a = init_params({"W": (2, 2)}, seed=9)
        b = init_params({"W": (2, 2)}, seed=9)
        np.testing.assert_array_equal(a["W"], b["W"])
        assert np.abs(a["W"]).max() <= 0.05
