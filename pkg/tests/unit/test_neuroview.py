"""
Tests unitarios del transform NeuroView y del modelo baseline.

El forward de NeuroView se contrasta con un camino independiente escrito con
einsum: extraer cada mapa, aplicar la sigmoide, reducir, concatenar por capa
y por vista y aplicar la cabeza afín.
"""

import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from neuroview.config import NeuroViewConfig
from neuroview.core import functional as F
from neuroview.core.arch import ArchSpec, LayerSpec, get_preset, output_shapes, unit_count
from neuroview.core.baseline import BaselineModel
from neuroview.core.factory import build_model, model_from_description
from neuroview.core.neuroview import NeuroViewModel
from neuroview.core.tensor import Tensor, no_grad
from neuroview.exceptions import DimensionError, LabelIndexError


def _oracle_conv(x, kernel, bias, stride, pad):
    x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    kh, kw = kernel.shape[2:]
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    return np.einsum("bchwij,ocij->bohw", windows, kernel) + bias[None, :, None, None]


def _oracle_pool(x, kernel, stride):
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    return windows.max(axis=(-2, -1))


def oracle_forward(model, images):
    """Camino de referencia tap-extract-reduce-concatenate-affine en float64."""
    images = np.asarray(images, dtype=np.float64)
    views = [images[:, v] for v in range(images.shape[1])] if images.ndim == 5 else [images]
    codes = []
    for view, x in enumerate(views):
        params = model.backbone_for(view).params
        conv = 0
        for layer in model.spec.layers:
            if layer.kind == "conv":
                kernel, bias = (p.data.astype(np.float64) for p in params[conv])
                pre = _oracle_conv(x, kernel, bias, layer.stride, layer.pad)
                x = np.maximum(pre, 0.0)
                if model.config.vq == "sigmoid":
                    tapped = 1.0 / (1.0 + np.exp(-pre / model.config.temperature))
                else:
                    tapped = x
                reducer = np.max if model.config.reduce == "max" else np.mean
                codes.append(reducer(tapped, axis=(2, 3)))
                conv += 1
            else:
                x = _oracle_pool(x, layer.kernel, layer.stride)
    z = np.concatenate(codes, axis=1)
    weight = model.head_weight.data.astype(np.float64)
    bias = model.head_bias.data.astype(np.float64)
    return np.einsum("bu,ku->bk", z, weight) + bias


def randomize_head(model, seed):
    rng = np.random.default_rng(seed)
    model.head_weight.assign(rng.standard_normal(model.head_weight.shape))
    model.head_bias.assign(rng.standard_normal(model.head_bias.shape))


class TestForwardOracle:
    """
    Tests del forward frente al camino de referencia.
    """

    @pytest.mark.parametrize("reduce", ["max", "mean"])
    @pytest.mark.parametrize("views", [1, 3])
    def test_vgg_mini_matches_oracle(self, reduce, views):
        """
        Verifica el forward de vgg-mini sobre 20 entradas aleatorias a 1e-6.
        """
        spec = get_preset("vgg-mini")
        model = NeuroViewModel(spec, NeuroViewConfig(reduce=reduce, views=views), seed=5,
                               dtype=np.float64)
        randomize_head(model, seed=6)

        rng = np.random.default_rng(7)
        shape = (20, 1, 28, 28) if views == 1 else (20, views, 1, 28, 28)
        images = rng.uniform(size=shape)

        with no_grad():
            logits = model.forward(images).data

        np.testing.assert_allclose(logits, oracle_forward(model, images), rtol=1e-6, atol=1e-6)

    @pytest.mark.parametrize("vq,temperature", [("identity", 1.0), ("sigmoid", 2.5)])
    def test_variants_match_oracle(self, small_spec, vq, temperature):
        """
        Verifica las variantes identidad y con temperatura frente al camino de referencia.
        """
        config = NeuroViewConfig(vq=vq, temperature=temperature, reduce="mean", views=2,
                                 shared_view_weights=False)
        model = NeuroViewModel(small_spec, config, seed=1, dtype=np.float64)
        randomize_head(model, seed=2)
        images = np.random.default_rng(3).uniform(size=(4, 2, 1, 8, 8))

        with no_grad():
            logits = model.forward(images).data

        np.testing.assert_allclose(logits, oracle_forward(model, images), rtol=1e-6, atol=1e-6)


class TestNeuroViewModel:
    """
    Tests para NeuroViewModel.
    """

    def test_codes_are_in_open_unit_interval(self, small_spec, rng):
        """
        Verifica que los códigos Soft VQ estén en (0, 1) y tengan ancho U_total.
        """
        model = NeuroViewModel(small_spec, seed=0)
        with no_grad():
            codes = model.extract_codes(rng.uniform(size=(5, 1, 8, 8)))

        assert codes.width == unit_count(small_spec) == 10
        assert np.all(codes.values.data > 0.0)
        assert np.all(codes.values.data < 1.0)

    def test_layout_is_view_major_then_layer(self, small_spec):
        """
        Verifica la disposición de columnas: vista tras vista y capa tras capa.
        """
        model = NeuroViewModel(small_spec, NeuroViewConfig(views=2), seed=0)
        slices = [(s.view, s.layer, s.start, s.stop) for s in model.unit_slices()]

        assert slices == [(0, 0, 0, 4), (0, 1, 4, 10), (1, 0, 10, 14), (1, 1, 14, 20)]
        assert model.total_units == 20

    def test_zero_head_gives_uniform_prediction(self, small_spec, rng):
        """
        Verifica que la cabeza inicializada a cero produzca logits nulos.
        """
        model = NeuroViewModel(small_spec, seed=0)
        images = rng.uniform(size=(4, 1, 8, 8))
        with no_grad():
            logits = model.forward(images)

        assert not np.any(logits.data)
        np.testing.assert_allclose(model.predict_proba(images), np.full((4, 3), 1.0 / 3), rtol=1e-6)

    def test_view_count_mismatch_raises(self, small_spec, rng):
        """
        Verifica que un número de vistas distinto lance DimensionError.
        """
        model = NeuroViewModel(small_spec, NeuroViewConfig(views=3), seed=0)
        with pytest.raises(DimensionError):
            model.forward(rng.uniform(size=(2, 2, 1, 8, 8)))

    def test_views_as_list(self, small_spec, rng):
        """
        Verifica que una lista de vistas equivalga al array [B, V, C, H, W].
        """
        model = NeuroViewModel(small_spec, NeuroViewConfig(views=2), seed=0, dtype=np.float64)
        randomize_head(model, seed=0)
        images = rng.uniform(size=(3, 2, 1, 8, 8))

        with no_grad():
            stacked = model.forward(images).data
            listed = model.forward([images[:, 0], images[:, 1]]).data

        np.testing.assert_array_equal(stacked, listed)

    def test_head_width_mismatch_raises(self, small_spec):
        """
        Verifica que la cabeza rechace códigos de otro ancho.
        """
        model = NeuroViewModel(small_spec, seed=0)
        with pytest.raises(DimensionError):
            model.head_forward(Tensor(np.zeros((2, 9), dtype=np.float32)))

    def test_weight_row_enumerates_every_unit(self, small_spec):
        """
        Verifica que weight_row devuelva U_total entradas en orden de concatenación.
        """
        model = NeuroViewModel(small_spec, NeuroViewConfig(views=2), seed=0)
        randomize_head(model, seed=9)
        entries = model.weight_row(1)

        assert len(entries) == model.total_units
        assert [(e.view, e.layer, e.channel) for e in entries[:5]] == [
            (0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3), (0, 1, 0)
        ]
        assert entries[10][:3] == (0, 1, 0)
        np.testing.assert_array_equal(np.array([e.weight for e in entries], dtype=np.float32),
                                      model.head_weight.data[1])

    @pytest.mark.parametrize("class_k", [-1, 3])
    def test_weight_row_out_of_range_raises(self, small_spec, class_k):
        """
        Verifica que una clase fuera de rango lance LabelIndexError.
        """
        with pytest.raises(LabelIndexError):
            NeuroViewModel(small_spec, seed=0).weight_row(class_k)

    def test_separate_view_weights(self, small_spec):
        """
        Verifica que sin pesos compartidos cada vista tenga su backbone.
        """
        model = NeuroViewModel(small_spec, NeuroViewConfig(views=2, shared_view_weights=False), seed=0)
        names = [name for name, _ in model.named_parameters()]

        assert "backbone.view0.conv0.weight" in names
        assert "backbone.view1.conv1.bias" in names
        assert names[-2:] == ["head.weight", "head.bias"]
        assert not np.array_equal(model.backbone_for(0).params[0][0].data,
                                  model.backbone_for(1).params[0][0].data)

    def test_shared_views_reuse_backbone(self, small_spec):
        """
        Verifica que con pesos compartidos todas las vistas usen el mismo backbone.
        """
        model = NeuroViewModel(small_spec, NeuroViewConfig(views=3), seed=0)
        assert model.backbone_for(0) is model.backbone_for(2)
        assert len(model.parameters()) == 4 + 2

    def test_gradient_reaches_first_conv(self, small_spec, rng):
        """
        Verifica que la pérdida propague gradiente no nulo hasta el primer kernel.
        """
        model = NeuroViewModel(small_spec, seed=0, dtype=np.float64)
        randomize_head(model, seed=4)
        loss = F.softmax_cross_entropy(model.forward(rng.uniform(size=(4, 1, 8, 8))), [0, 1, 2, 0])
        loss.backward()

        kernel = model.backbone_for(0).params[0][0]
        assert kernel.grad is not None
        assert np.any(kernel.grad != 0.0)

    def test_point_maps_reduce_identically(self, rng):
        """
        Verifica que con mapas 1x1 las reducciones max y mean den los mismos códigos.
        """
        spec = ArchSpec(name="point", input_shape=(2, 1, 1),
                        layers=[LayerSpec.conv(3, kernel=1, pad=0), LayerSpec.conv(2, kernel=1, pad=0)],
                        num_classes=2)
        images = rng.uniform(size=(5, 2, 1, 1))
        with no_grad():
            by_max = NeuroViewModel(spec, NeuroViewConfig(reduce="max"), seed=0).extract_codes(images)
            by_mean = NeuroViewModel(spec, NeuroViewConfig(reduce="mean"), seed=0).extract_codes(images)

        np.testing.assert_array_equal(by_max.values.data, by_mean.values.data)

    def test_batch_permutation_permutes_logits(self, small_spec, rng):
        """
        Verifica que permutar el lote permute las filas de logits de la misma forma.
        """
        model = NeuroViewModel(small_spec, seed=0, dtype=np.float64)
        randomize_head(model, seed=5)
        images = rng.uniform(size=(6, 1, 8, 8))
        order = rng.permutation(6)

        with no_grad():
            logits = model.forward(images).data
            permuted = model.forward(images[order]).data

        np.testing.assert_allclose(permuted, logits[order], rtol=1e-10, atol=1e-10)


class TestBaselineAndFactory:
    """
    Tests para el modelo baseline y la factory de modelos.
    """

    def test_baseline_forward_shape(self, small_spec, rng):
        """
        Verifica que el baseline produzca [B, K] con cabeza sobre el último mapa.
        """
        model = BaselineModel(small_spec, seed=0)
        with no_grad():
            logits = model.forward(rng.uniform(size=(3, 1, 8, 8)))

        assert logits.shape == (3, 3)
        assert model.head_weight.shape == (3, output_shapes(small_spec)[-1][0])

    def test_baseline_shares_backbone_with_neuroview(self, small_spec):
        """
        Verifica que baseline y NeuroView con la misma semilla compartan inicialización.
        """
        baseline = BaselineModel(small_spec, seed=4)
        neuroview = NeuroViewModel(small_spec, seed=4)
        for a, b in zip(baseline.backbone.parameters(), neuroview.backbones[0].parameters()):
            np.testing.assert_array_equal(a.data, b.data)

    def test_factory_families(self, small_spec):
        """
        Verifica la construcción de ambas familias y el rechazo de familias desconocidas.
        """
        assert build_model("neuroview", small_spec).family == "neuroview"
        assert build_model("baseline", small_spec).family == "baseline"
        with pytest.raises(ValueError):
            build_model("resnet", small_spec)

    def test_baseline_rejects_multiple_views(self, small_spec):
        """
        Verifica que el baseline no admita varias vistas.
        """
        with pytest.raises(ValueError):
            build_model("baseline", small_spec, NeuroViewConfig(views=2))

    @pytest.mark.parametrize("family", ["neuroview", "baseline"])
    def test_model_from_description(self, small_spec, family):
        """
        Verifica que describe() permita reconstruir el mismo modelo.
        """
        config = NeuroViewConfig(reduce="mean") if family == "neuroview" else None
        model = build_model(family, small_spec, config, seed=8)
        rebuilt = model_from_description(model.describe())

        assert rebuilt.describe() == model.describe()
        for (name_a, a), (name_b, b) in zip(model.named_parameters(), rebuilt.named_parameters()):
            assert name_a == name_b
            np.testing.assert_array_equal(a.data, b.data)
