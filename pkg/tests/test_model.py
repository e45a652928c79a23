import numpy as np
import pytest
from scipy.signal import correlate2d

from gnconvert import (
    LayerSpec,
    ModelSpec,
    ModelValidationError,
    QCFSParams,
    load_model,
    model_from_json,
    model_hash,
    model_to_json,
    save_model,
    validate_model,
)
from gnconvert.model import apply_layer_linear, output_shape


def dense(out_n, in_n, lam=None, levels=4, seed=0, theta=None, tau=None):
    rng = np.random.default_rng(seed)
    return LayerSpec(
        kind="dense",
        weights=rng.normal(size=(out_n, in_n)),
        bias=rng.normal(size=out_n),
        act=None if lam is None else QCFSParams(lam=lam, levels=levels),
        theta=theta,
        tau=tau,
    )


def small_mlp(levels=4, theta=False, tau=None):
    layers = [
        dense(3, 2, lam=1.5, levels=levels, seed=1, theta=1.5 if theta else None, tau=tau),
        dense(2, 3, seed=2),
    ]
    return ModelSpec(input_shape=(2,), levels=levels, layers=layers)


class TestValidation:
    def test_valid_model_passes(self):
        validate_model(small_mlp())

    def test_empty_model_rejected(self):
        with pytest.raises(ModelValidationError):
            validate_model(ModelSpec(input_shape=(2,), levels=4, layers=[]))

    def test_shape_mismatch_names_layer(self):
        model = small_mlp()
        model.layers[1] = dense(2, 5, seed=3)
        with pytest.raises(ModelValidationError, match="layer 1"):
            validate_model(model)

    def test_final_layer_activation_rejected(self):
        model = small_mlp()
        model.layers[-1].act = QCFSParams(lam=1.0, levels=4)
        with pytest.raises(ModelValidationError, match="final layer"):
            validate_model(model)

    def test_tau_without_theta_rejected(self):
        model = small_mlp()
        model.layers[0].tau = 4
        with pytest.raises(ModelValidationError, match="tau"):
            validate_model(model)

    def test_theta_on_non_activated_layer_rejected(self):
        model = small_mlp()
        model.layers[1].theta = 1.0
        with pytest.raises(ModelValidationError, match="non-activated"):
            validate_model(model)

    def test_levels_mismatch_rejected(self):
        model = small_mlp()
        model.layers[0].act = QCFSParams(lam=1.0, levels=8)
        with pytest.raises(ModelValidationError, match="levels"):
            validate_model(model)

    def test_pool_must_divide_input(self):
        model = ModelSpec(
            input_shape=(1, 5, 4),
            levels=4,
            layers=[LayerSpec(kind="avgpool2d", pool=(2, 2))],
        )
        with pytest.raises(ModelValidationError, match="layer 0"):
            validate_model(model)

    def test_activation_on_pool_rejected(self):
        model = ModelSpec(
            input_shape=(1, 4, 4),
            levels=4,
            layers=[
                LayerSpec(kind="avgpool2d", pool=(2, 2), act=QCFSParams(lam=1.0, levels=4)),
                LayerSpec(kind="flatten"),
            ],
        )
        with pytest.raises(ModelValidationError, match="activation"):
            validate_model(model)

    def test_output_shape_chain(self):
        model = ModelSpec(
            input_shape=(2, 6, 6),
            levels=4,
            layers=[
                LayerSpec(kind="conv2d", weights=np.zeros((3, 2, 3, 3)), bias=np.zeros(3)),
                LayerSpec(kind="avgpool2d", pool=(2, 2)),
                LayerSpec(kind="flatten"),
                dense(2, 12, seed=4),
            ],
        )
        assert output_shape(model) == (2,)


class TestLayerOps:
    def test_dense_matches_matmul(self):
        layer = dense(3, 4, seed=5)
        X = np.random.default_rng(6).normal(size=(7, 4))
        expected = X @ layer.weights.T + layer.bias
        assert np.array_equal(apply_layer_linear(layer, X), expected)

    def test_conv2d_matches_scipy_correlate(self):
        rng = np.random.default_rng(7)
        w = rng.normal(size=(3, 2, 3, 3))
        b = rng.normal(size=3)
        layer = LayerSpec(kind="conv2d", weights=w, bias=b)
        X = rng.normal(size=(2, 2, 5, 6))
        got = apply_layer_linear(layer, X)
        for n in range(2):
            for o in range(3):
                ref = sum(
                    correlate2d(X[n, c], w[o, c], mode="valid") for c in range(2)
                ) + b[o]
                np.testing.assert_allclose(got[n, o], ref, atol=1e-12)

    def test_avgpool_matches_manual_mean(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(1, 1, 4, 4))
        layer = LayerSpec(kind="avgpool2d", pool=(2, 2))
        got = apply_layer_linear(layer, X)
        assert got.shape == (1, 1, 2, 2)
        assert got[0, 0, 0, 0] == X[0, 0, :2, :2].mean()
        assert got[0, 0, 1, 1] == X[0, 0, 2:, 2:].mean()

    def test_flatten_row_major(self):
        X = np.arange(24, dtype=np.float64).reshape(1, 2, 3, 4)
        layer = LayerSpec(kind="flatten")
        assert np.array_equal(apply_layer_linear(layer, X)[0], np.arange(24))


class TestJsonFormat:
    def test_round_trip_preserves_everything(self, tmp_path):
        model = small_mlp(theta=True, tau=4)
        model.metadata = {"seed": 3}
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        assert back.input_shape == model.input_shape
        assert back.levels == model.levels
        assert back.metadata == model.metadata
        for a, b in zip(model.layers, back.layers):
            assert a.kind == b.kind
            assert np.array_equal(a.weights, b.weights)
            assert np.array_equal(a.bias, b.bias)
            assert (a.act is None) == (b.act is None)
            if a.act is not None:
                assert a.act.lam == b.act.lam
            assert a.theta == b.theta
            assert a.tau == b.tau

    def test_theta_tau_only_when_converted(self):
        text = model_to_json(small_mlp())
        assert '"theta"' not in text and '"tau"' not in text
        text = model_to_json(small_mlp(theta=True, tau=2))
        assert '"theta"' in text and '"tau"' in text

    def test_serialization_is_deterministic(self):
        model = small_mlp(theta=True, tau=4)
        assert model_to_json(model) == model_to_json(model)

    def test_bad_version_rejected(self):
        text = model_to_json(small_mlp()).replace('"version": 1', '"version": 99')
        with pytest.raises(ModelValidationError, match="version"):
            model_from_json(text)

    def test_corrupt_weights_rejected(self):
        model = small_mlp()
        text = model_to_json(model)
        doc_head = text.index('"weights": [')
        broken = text[:doc_head] + '"weights": [1.0], "_x": [' + text[doc_head + len('"weights": ['):]
        with pytest.raises((ModelValidationError, ValueError)):
            model_from_json(broken)

    def test_hash_stable_and_content_sensitive(self):
        model = small_mlp()
        h1 = model_hash(model)
        assert h1 == model_hash(model)
        changed = small_mlp()
        changed.layers[0].weights[0, 0] += 1.0
        assert model_hash(changed) != h1
