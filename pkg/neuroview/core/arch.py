"""
Descripción declarativa de backbones convolucionales.

Un ArchSpec es la fuente de verdad para enumerar las unidades que NeuroView
expone: cada canal de cada capa convolucional es una unidad. Las capas conv
van siempre seguidas de una ReLU implícita; no hay clasificador final en el
backbone.
"""

import json
import logging
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from neuroview.core import functional as F
from neuroview.core.tensor import DEFAULT_DTYPE, Tensor
from neuroview.exceptions import DimensionError

logger = logging.getLogger(__name__)


class LayerSpec(BaseModel):
    """
    Capa del backbone.

    Attributes:
        kind (str): 'conv' o 'maxpool'.
        out_channels (int, optional): Canales de salida (solo conv).
        kernel (int): Lado de la ventana.
        stride (int): Paso de la ventana.
        pad (int): Padding simétrico (solo conv).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["conv", "maxpool"]
    out_channels: Optional[int] = Field(default=None, ge=1)
    kernel: int = Field(default=3, ge=1)
    stride: int = Field(default=1, ge=1)
    pad: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind == "conv" and self.out_channels is None:
            raise ValueError("Una capa conv necesita out_channels")
        if self.kind == "maxpool" and (self.out_channels is not None or self.pad):
            raise ValueError("Una capa maxpool no admite out_channels ni pad")
        return self

    @classmethod
    def conv(cls, out_channels, kernel=3, stride=1, pad=1):
        return cls(kind="conv", out_channels=out_channels, kernel=kernel, stride=stride, pad=pad)

    @classmethod
    def maxpool(cls, kernel=2, stride=2):
        return cls(kind="maxpool", kernel=kernel, stride=stride)


class ArchSpec(BaseModel):
    """
    Arquitectura completa de un backbone.

    Invariantes:
        - Las dimensiones espaciales se mantienen >= 1 a lo largo de todas las capas.
        - Hay al menos una capa conv.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    input_shape: Tuple[int, int, int]
    layers: List[LayerSpec]
    num_classes: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_geometry(self):
        if any(extent < 1 for extent in self.input_shape):
            raise ValueError(f"input_shape inválido: {self.input_shape}")
        if not any(layer.kind == "conv" for layer in self.layers):
            raise ValueError("El backbone necesita al menos una capa conv")
        output_shapes(self)
        return self

    def to_json(self, indent=2):
        return json.dumps(self.model_dump(), indent=indent)

    @classmethod
    def from_json(cls, text):
        return cls.model_validate_json(text)

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path):
        """
        Carga un ArchSpec desde un fichero JSON.

        Args:
            path (str or Path): Ruta del documento.

        Returns:
            ArchSpec: Especificación validada.
        """
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def output_shapes(spec):
    """
    Calcula la forma (C, H, W) tras cada capa del backbone.

    Args:
        spec (ArchSpec): Arquitectura.

    Returns:
        list of tuple: Una forma por capa, en orden.

    Raises:
        DimensionError: Si alguna dimensión espacial cae por debajo de 1.
    """
    channels, height, width = spec.input_shape
    shapes = []

    for index, layer in enumerate(spec.layers):
        pad = layer.pad if layer.kind == "conv" else 0
        height = (height + 2 * pad - layer.kernel) // layer.stride + 1
        width = (width + 2 * pad - layer.kernel) // layer.stride + 1
        if height < 1 or width < 1:
            raise DimensionError(
                f"La capa {index} ({layer.kind}) de '{spec.name}' deja una extensión "
                f"espacial vacía para input_shape={tuple(spec.input_shape)}"
            )
        if layer.kind == "conv":
            channels = layer.out_channels
        shapes.append((channels, height, width))

    return shapes


def unit_layout(spec):
    """
    Enumera las unidades por capa conv en orden del backbone.

    Returns:
        list of tuple: Pares (layer_index, channel_count); layer_index es el
            ordinal de la capa conv empezando en 0.
    """
    convs = [layer for layer in spec.layers if layer.kind == "conv"]
    return [(index, layer.out_channels) for index, layer in enumerate(convs)]


def unit_count(spec):
    """Número total de unidades: suma de out_channels de las capas conv."""
    return sum(channels for _, channels in unit_layout(spec))


_VGG11_CHANNELS = (64, "M", 128, "M", 256, 256, "M", 512, 512, "M", 512, 512, "M")


def _vgg(name, plan, input_shape, num_classes):
    layers = [LayerSpec.maxpool() if item == "M" else LayerSpec.conv(item) for item in plan]
    return ArchSpec(name=name, input_shape=input_shape, layers=layers, num_classes=num_classes)


PRESETS = {
    "vgg-tiny": lambda: _vgg("vgg-tiny", (8, "M", 16, "M"), (1, 28, 28), 10),
    "vgg-mini": lambda: _vgg("vgg-mini", (16, "M", 32, "M", 64, 64, "M"), (1, 28, 28), 10),
    "vgg11": lambda: _vgg("vgg11", _VGG11_CHANNELS, (3, 224, 224), 10),
}


def get_preset(name, input_shape=None, num_classes=None):
    """
    Retorna una arquitectura predefinida, opcionalmente reajustada a un dataset.

    Args:
        name (str): 'vgg-tiny', 'vgg-mini' o 'vgg11'.
        input_shape (tuple, optional): (C, H, W) que sustituye al del preset.
        num_classes (int, optional): Número de clases que sustituye al del preset.

    Returns:
        ArchSpec: Arquitectura validada.

    Raises:
        ValueError: Si el preset no existe o la nueva geometría es inválida.
    """
    if name not in PRESETS:
        raise ValueError(
            f"Arquitectura inválida: '{name}'. Opciones válidas: {', '.join(sorted(PRESETS))}"
        )

    return rebind(PRESETS[name](), input_shape, num_classes)


def rebind(spec, input_shape=None, num_classes=None):
    """Retorna `spec` con otra geometría de entrada y/o número de clases, revalidado."""
    if input_shape is None and num_classes is None:
        return spec
    return ArchSpec(
        name=spec.name,
        input_shape=tuple(input_shape) if input_shape is not None else spec.input_shape,
        layers=spec.layers,
        num_classes=num_classes if num_classes is not None else spec.num_classes,
    )


def resolve_arch(value, input_shape=None, num_classes=None):
    """
    Resuelve un nombre de preset o una ruta a un JSON de ArchSpec.

    Returns:
        ArchSpec: Arquitectura reajustada a la geometría dada.
    """
    if value in PRESETS:
        return get_preset(value, input_shape, num_classes)
    return rebind(ArchSpec.load(value), input_shape, num_classes)


class BackboneOutput:
    """
    Resultado del forward del backbone.

    Attributes:
        final (Tensor): Último mapa de características.
        pre_activations (list of Tensor): Entrada de cada ReLU, una por capa conv.
        activations (list of Tensor): Salida de cada ReLU, una por capa conv.
    """

    def __init__(self, final, pre_activations, activations):
        self.final = final
        self.pre_activations = pre_activations
        self.activations = activations


class Backbone:
    """
    Backbone convolucional construido a partir de un ArchSpec.

    Attributes:
        spec (ArchSpec): Arquitectura.
        params (list of tuple): Pares (kernel, bias) por capa conv.
    """

    def __init__(self, spec, params):
        self.spec = spec
        self.params = params

    def parameters(self):
        return [tensor for pair in self.params for tensor in pair]

    def forward(self, x):
        """
        Ejecuta el backbone exponiendo las pre- y post-activaciones de cada conv.

        Args:
            x (Tensor): Entrada [B, C, H, W] con (C, H, W) == spec.input_shape.

        Returns:
            BackboneOutput: Mapa final y mapas intermedios por capa conv.

        Raises:
            DimensionError: Si la forma de la entrada no coincide con la arquitectura.
        """
        if x.ndim != 4 or tuple(x.shape[1:]) != tuple(self.spec.input_shape):
            raise DimensionError(
                f"Entrada de forma {x.shape} incompatible con input_shape "
                f"{tuple(self.spec.input_shape)} de '{self.spec.name}'"
            )

        pre_activations, activations = [], []
        conv_index = 0
        for layer in self.spec.layers:
            if layer.kind == "conv":
                kernel, bias = self.params[conv_index]
                pre = F.conv2d(x, kernel, bias, stride=layer.stride, pad=layer.pad)
                x = F.relu(pre)
                pre_activations.append(pre)
                activations.append(x)
                conv_index += 1
            else:
                x = F.maxpool2d(x, layer.kernel, layer.stride)

        return BackboneOutput(x, pre_activations, activations)

    __call__ = forward


def build_backbone(spec, seed, dtype=DEFAULT_DTYPE, prefix="backbone"):
    """
    Construye los parámetros del backbone con inicialización uniforme escalada por fan-in.

    Los kernels se muestrean en U(-sqrt(6/fan_in), sqrt(6/fan_in)) y los bias
    se inicializan a cero. La misma semilla produce parámetros idénticos.

    Args:
        spec (ArchSpec): Arquitectura.
        seed (int): Semilla de inicialización.
        dtype: Tipo de los parámetros (float32 para entrenar, float64 para verificar).
        prefix (str): Prefijo de los nombres de parámetro.

    Returns:
        Backbone: Backbone listo para forward.
    """
    rng = np.random.default_rng(seed)
    in_channels = spec.input_shape[0]
    params = []

    convs = [layer for layer in spec.layers if layer.kind == "conv"]
    for index, layer in enumerate(convs):
        out_channels = layer.out_channels
        fan_in = in_channels * layer.kernel * layer.kernel
        bound = math.sqrt(6.0 / fan_in)
        shape = (out_channels, in_channels, layer.kernel, layer.kernel)

        kernel = Tensor(rng.uniform(-bound, bound, size=shape).astype(dtype),
                        requires_grad=True, name=f"{prefix}.conv{index}.weight")
        bias = Tensor(np.zeros(out_channels, dtype=dtype),
                      requires_grad=True, name=f"{prefix}.conv{index}.bias")
        params.append((kernel, bias))
        in_channels = out_channels

    logger.debug(f"Backbone '{spec.name}' construido con semilla {seed}: {len(params)} capas conv")
    return Backbone(spec, params)
