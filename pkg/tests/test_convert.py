import numpy as np
import pytest

from gnconvert import (
    LayerSpec,
    ModelSpec,
    QCFSParams,
    SimConfig,
    ann_to_snn,
    convert,
    model_from_json,
    model_to_json,
    replace_if_with_gn,
    snn_forward_batch,
)
from gnconvert.network import _spiking_params


def mlp(lams=(2.0, 1.0), seed=0):
    rng = np.random.default_rng(seed)
    widths = (2, 4, 4, 2)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
        act = None if i == 2 else QCFSParams(lam=lams[i], levels=4)
        layers.append(LayerSpec(
            kind="dense",
            weights=rng.normal(size=(fan_out, fan_in)) * 0.6,
            bias=rng.normal(size=fan_out) * 0.1,
            act=act,
        ))
    return ModelSpec(input_shape=(2,), levels=4, layers=layers)


class TestAnnToSnn:
    def test_threshold_equals_lambda(self):
        snn = ann_to_snn(mlp(lams=(2.0, 1.3)))
        assert snn.layers[0].theta == 2.0
        assert snn.layers[1].theta == 1.3
        assert snn.layers[2].theta is None

    def test_affine_only_model_unchanged(self):
        model = ModelSpec(
            input_shape=(2,),
            levels=4,
            layers=[LayerSpec(kind="dense", weights=np.eye(2), bias=np.zeros(2))],
        )
        snn = ann_to_snn(model)
        assert all(layer.theta is None for layer in snn.layers)
        assert np.array_equal(snn.layers[0].weights, model.layers[0].weights)

    def test_round_trips_through_json(self):
        snn = ann_to_snn(mlp())
        back = model_from_json(model_to_json(snn))
        assert [l.theta for l in back.layers] == [l.theta for l in snn.layers]
        for a, b in zip(snn.layers, back.layers):
            assert np.array_equal(a.weights, b.weights)

    def test_weights_bit_identical(self):
        model = mlp()
        snn = ann_to_snn(model)
        for a, b in zip(model.layers, snn.layers):
            assert np.array_equal(a.weights, b.weights)
            assert np.array_equal(a.bias, b.bias)


class TestReplaceIfWithGn:
    def test_member_thresholds_from_theta(self):
        snn = replace_if_with_gn(ann_to_snn(mlp(lams=(2.0, 1.0))), 4)
        layer = snn.layers[0]
        assert layer.tau == 4
        thresholds, unit = _spiking_params(layer, SimConfig(T=1, neuron="gn"), "layer 0")
        assert unit == 0.5
        assert np.array_equal(thresholds, [0.5, 1.0, 1.5, 2.0])

    def test_degenerate_single_member(self):
        snn = replace_if_with_gn(ann_to_snn(mlp()), 1)
        layer = snn.layers[0]
        thresholds, unit = _spiking_params(layer, SimConfig(T=1, neuron="gn"), "layer 0")
        assert unit == layer.theta
        assert np.array_equal(thresholds, [layer.theta])

    def test_tau_below_one_rejected(self):
        with pytest.raises(ValueError, match="tau"):
            replace_if_with_gn(ann_to_snn(mlp()), 0)

    def test_unconverted_model_rejected(self):
        with pytest.raises(ValueError, match="ann_to_snn"):
            replace_if_with_gn(mlp(), 4)

    def test_idempotent_under_same_tau(self):
        snn = ann_to_snn(mlp())
        once = replace_if_with_gn(snn, 4)
        twice = replace_if_with_gn(once, 4)
        assert model_to_json(once) == model_to_json(twice)

    def test_weights_bit_identical(self):
        snn = ann_to_snn(mlp())
        gn = replace_if_with_gn(snn, 8)
        for a, b in zip(snn.layers, gn.layers):
            assert np.array_equal(a.weights, b.weights)
            assert np.array_equal(a.bias, b.bias)

    def test_gn_and_if_agree_at_large_T(self):
        snn_if = ann_to_snn(mlp(seed=3))
        snn_gn = replace_if_with_gn(snn_if, 4)
        X = np.random.default_rng(4).normal(size=(16, 2))
        li = snn_forward_batch(snn_if, X, SimConfig.from_model(snn_if, T=512))
        lg = snn_forward_batch(snn_gn, X, SimConfig.from_model(snn_gn, T=512))
        assert float(((li - lg) ** 2).mean()) < 1e-3


def test_convert_pipeline_is_composition():
    model = mlp()
    assert model_to_json(convert(model, 4)) == model_to_json(
        replace_if_with_gn(ann_to_snn(model), 4)
    )
