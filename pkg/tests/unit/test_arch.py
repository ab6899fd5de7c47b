"""
Tests unitarios de ArchSpec, los presets y la construcción del backbone.
"""

import numpy as np
import pytest

from neuroview.core.arch import (
    ArchSpec,
    LayerSpec,
    build_backbone,
    get_preset,
    output_shapes,
    rebind,
    resolve_arch,
    unit_count,
    unit_layout,
)
from neuroview.core.tensor import Tensor
from neuroview.exceptions import DimensionError


class TestPresets:
    """
    Tests para las arquitecturas predefinidas.
    """

    def test_vgg11_has_2752_units(self):
        """
        Verifica que vgg11 exponga exactamente 2752 unidades.
        """
        assert unit_count(get_preset("vgg11")) == 2752

    def test_vgg_mini_unit_count(self):
        """
        Verifica que vgg-mini exponga la suma de sus canales conv.
        """
        spec = get_preset("vgg-mini")
        assert unit_count(spec) == 16 + 32 + 64 + 64
        assert unit_layout(spec) == [(0, 16), (1, 32), (2, 64), (3, 64)]

    def test_vgg_tiny_unit_count(self):
        """
        Verifica el preset pequeño usado en pruebas rápidas.
        """
        assert unit_count(get_preset("vgg-tiny")) == 24

    def test_unknown_preset_raises(self):
        """
        Verifica que un preset inexistente lance ValueError.
        """
        with pytest.raises(ValueError, match="vgg-mini"):
            get_preset("resnet50")

    def test_preset_rebinding(self):
        """
        Verifica que un preset se pueda reajustar a otra geometría.
        """
        spec = get_preset("vgg-mini", input_shape=(3, 32, 32), num_classes=4)
        assert spec.input_shape == (3, 32, 32)
        assert spec.num_classes == 4
        assert output_shapes(spec)[-1] == (64, 4, 4)

    def test_rebind_to_too_small_input_raises(self):
        """
        Verifica que una geometría que vacía el mapa espacial sea rechazada.
        """
        with pytest.raises(ValueError):
            rebind(get_preset("vgg11"), input_shape=(3, 8, 8))


class TestArchSpec:
    """
    Tests para la validación y serialización de ArchSpec.
    """

    def test_output_shapes(self, small_spec):
        """
        Verifica la forma tras cada capa.
        """
        assert output_shapes(small_spec) == [(4, 8, 8), (4, 4, 4), (6, 4, 4)]

    def test_spec_without_conv_raises(self):
        """
        Verifica que un backbone sin capas conv sea rechazado.
        """
        with pytest.raises(ValueError):
            ArchSpec(name="x", input_shape=(1, 8, 8), layers=[LayerSpec.maxpool()], num_classes=2)

    def test_empty_spatial_extent_raises(self):
        """
        Verifica que una arquitectura que reduce el mapa a 0 sea rechazada.
        """
        layers = [LayerSpec.conv(2, kernel=3, pad=0)] * 3
        with pytest.raises(ValueError, match="extensión"):
            ArchSpec(name="x", input_shape=(1, 5, 5), layers=layers, num_classes=2)

    def test_output_shapes_raises_dimension_error(self):
        """
        Verifica que output_shapes lance DimensionError sobre una geometría inválida.
        """
        spec = ArchSpec.model_construct(
            name="x", input_shape=(1, 2, 2), layers=[LayerSpec.conv(1, kernel=3, pad=0)], num_classes=2
        )
        with pytest.raises(DimensionError):
            output_shapes(spec)

    def test_conv_needs_out_channels(self):
        """
        Verifica que una conv sin out_channels sea rechazada.
        """
        with pytest.raises(ValueError):
            LayerSpec(kind="conv")

    def test_maxpool_rejects_out_channels(self):
        """
        Verifica que un maxpool con out_channels sea rechazado.
        """
        with pytest.raises(ValueError):
            LayerSpec(kind="maxpool", out_channels=4)

    def test_json_round_trip(self, small_spec, tmp_path):
        """
        Verifica el guardado y la carga de un ArchSpec en JSON.
        """
        path = tmp_path / "arch.json"
        small_spec.save(path)

        assert ArchSpec.load(path) == small_spec
        assert ArchSpec.from_json(small_spec.to_json()) == small_spec

    def test_resolve_arch_from_path(self, small_spec, tmp_path):
        """
        Verifica que resolve_arch acepte una ruta a un JSON.
        """
        path = tmp_path / "arch.json"
        small_spec.save(path)
        spec = resolve_arch(str(path), num_classes=5)
        assert spec.num_classes == 5
        assert spec.layers == small_spec.layers


class TestBackbone:
    """
    Tests para la construcción y el forward del backbone.
    """

    def test_parameter_names_and_shapes(self, small_spec):
        """
        Verifica nombres, formas y bias a cero.
        """
        backbone = build_backbone(small_spec, seed=0)
        params = backbone.parameters()

        assert [p.name for p in params] == [
            "backbone.conv0.weight", "backbone.conv0.bias",
            "backbone.conv1.weight", "backbone.conv1.bias",
        ]
        assert params[0].shape == (4, 1, 3, 3)
        assert params[2].shape == (6, 4, 3, 3)
        assert not np.any(params[1].data)

    def test_initialization_bound(self, small_spec):
        """
        Verifica que los kernels respeten la cota sqrt(6 / fan_in).
        """
        params = build_backbone(small_spec, seed=3).parameters()
        assert np.abs(params[0].data).max() <= np.sqrt(6.0 / 9)
        assert np.abs(params[2].data).max() <= np.sqrt(6.0 / 36)

    def test_same_seed_same_parameters(self, small_spec):
        """
        Verifica que la inicialización sea determinista.
        """
        a = build_backbone(small_spec, seed=11).parameters()
        b = build_backbone(small_spec, seed=11).parameters()
        c = build_backbone(small_spec, seed=12).parameters()

        assert all(np.array_equal(x.data, y.data) for x, y in zip(a, b))
        assert not np.array_equal(a[0].data, c[0].data)

    def test_forward_exposes_every_conv(self, small_spec, rng):
        """
        Verifica que el forward exponga pre- y post-activaciones de cada conv.
        """
        backbone = build_backbone(small_spec, seed=0)
        out = backbone(Tensor(rng.uniform(size=(2, 1, 8, 8)).astype(np.float32)))

        assert [t.shape for t in out.pre_activations] == [(2, 4, 8, 8), (2, 6, 4, 4)]
        for pre, post in zip(out.pre_activations, out.activations):
            np.testing.assert_array_equal(post.data, np.maximum(pre.data, 0.0))
        assert out.final.shape == (2, 6, 4, 4)

    def test_forward_rejects_wrong_shape(self, small_spec):
        """
        Verifica que una entrada de otra forma lance DimensionError.
        """
        backbone = build_backbone(small_spec, seed=0)
        with pytest.raises(DimensionError):
            backbone(Tensor(np.zeros((1, 1, 9, 9), dtype=np.float32)))
