"""
Transform NeuroView.

Cada unidad (canal de una capa conv) del backbone aporta un código Soft VQ,
σ(pre-activación / T), que se reduce espacialmente a un escalar. Los códigos se
concatenan desde la primera capa hasta la última y, en configuraciones
multivista, vista tras vista. Una única cabeza lineal global W·z + b clasifica
a partir de ese vector, de modo que cada columna de W corresponde exactamente
a una unidad.
"""

import logging
from typing import NamedTuple

import numpy as np

from neuroview.config import NeuroViewConfig
from neuroview.core import functional as F
from neuroview.core.arch import build_backbone, unit_count, unit_layout
from neuroview.core.base_model import BaseClassifier
from neuroview.core.tensor import DEFAULT_DTYPE, Tensor
from neuroview.exceptions import DimensionError, LabelIndexError

logger = logging.getLogger(__name__)


class UnitSlice(NamedTuple):
    """Columnas [start, stop) de la cabeza que corresponden a una capa de una vista."""

    view: int
    layer: int
    start: int
    stop: int


class UnitWeight(NamedTuple):
    layer: int
    view: int
    channel: int
    weight: float


class CodeVector:
    """
    Vector de códigos reducidos y concatenados.

    Attributes:
        values (Tensor): Códigos [B, U_total].
        layout (list of UnitSlice): Partición de las columnas por vista y capa.
    """

    def __init__(self, values, layout):
        self.values = values
        self.layout = layout

    @property
    def width(self):
        return self.values.shape[1]


class NeuroViewModel(BaseClassifier):
    """
    Backbone convolucional con cabeza lineal global sobre los códigos de todas sus unidades.

    Con `shared_view_weights` un único backbone se aplica a todas las vistas;
    en otro caso cada vista tiene su propio backbone (semilla seed + vista).
    La cabeza se inicializa a cero.

    Attributes:
        config (NeuroViewConfig): Configuración del transform.
        backbones (list of Backbone): Uno compartido o uno por vista.
        head_weight (Tensor): W [num_classes, U_total].
        head_bias (Tensor): b [num_classes].
    """

    family = "neuroview"

    def __init__(self, spec, config=None, seed=0, dtype=DEFAULT_DTYPE):
        config = config or NeuroViewConfig()
        super().__init__(spec, seed, views=config.views, dtype=dtype)
        self.config = config

        if config.shared_view_weights:
            self.backbones = [build_backbone(spec, seed, self.dtype, prefix="backbone")]
        else:
            self.backbones = [
                build_backbone(spec, seed + view, self.dtype, prefix=f"backbone.view{view}")
                for view in range(config.views)
            ]

        width = self.total_units
        self.head_weight = Tensor(np.zeros((spec.num_classes, width), dtype=self.dtype),
                                  requires_grad=True, name="head.weight")
        self.head_bias = Tensor(np.zeros(spec.num_classes, dtype=self.dtype),
                                requires_grad=True, name="head.bias")

        logger.info(
            f"Modelo NeuroView '{spec.name}' creado: {width} unidades "
            f"({config.views} vistas, vq={config.vq}, reduce={config.reduce})"
        )

    @property
    def units_per_view(self):
        return unit_count(self.spec)

    @property
    def total_units(self):
        return self.config.views * self.units_per_view

    def backbone_for(self, view):
        return self.backbones[0] if self.config.shared_view_weights else self.backbones[view]

    def parameters(self):
        params = [tensor for backbone in self.backbones for tensor in backbone.parameters()]
        return params + [self.head_weight, self.head_bias]

    def unit_slices(self):
        """
        Partición de las columnas de la cabeza en orden de concatenación.

        Returns:
            list of UnitSlice: Vista a vista y, dentro de cada vista, capa a capa.
        """
        slices = []
        start = 0
        for view in range(self.config.views):
            for layer, channels in unit_layout(self.spec):
                slices.append(UnitSlice(view, layer, start, start + channels))
                start += channels
        return slices

    def _tap(self, output, layer):
        if self.config.vq == "identity":
            return output.activations[layer]
        pre = output.pre_activations[layer]
        if self.config.temperature != 1.0:
            pre = F.scale(pre, 1.0 / self.config.temperature)
        return F.sigmoid(pre)

    def extract_codes(self, inputs):
        """
        Calcula el CodeVector de un lote.

        Args:
            inputs: Una entrada por vista (ver BaseClassifier.split_views).

        Returns:
            CodeVector: Códigos [B, U_total], en (0, 1) cuando vq='sigmoid'.

        Raises:
            DimensionError: Si el número de vistas o la forma no coinciden.
        """
        views = self.split_views(inputs)
        codes = []
        for view, x in enumerate(views):
            output = self.backbone_for(view).forward(x)
            for layer in range(len(output.pre_activations)):
                codes.append(F.reduce_spatial(self._tap(output, layer), self.config.reduce))
        return CodeVector(F.concat(codes), self.unit_slices())

    def head_forward(self, codes):
        """
        Aplica la cabeza lineal global: logits = W·z + b.

        Raises:
            DimensionError: Si el ancho de los códigos no es U_total.
        """
        values = codes.values if isinstance(codes, CodeVector) else codes
        if values.ndim != 2 or values.shape[1] != self.total_units:
            raise DimensionError(
                f"Códigos de forma {values.shape}; la cabeza espera ancho {self.total_units}"
            )
        return F.linear(values, self.head_weight, self.head_bias)

    def forward(self, inputs):
        return self.head_forward(self.extract_codes(inputs))

    def _check_class(self, class_k):
        if not 0 <= class_k < self.num_classes:
            raise LabelIndexError(
                f"Clase {class_k} fuera de rango [0, {self.num_classes})"
            )

    def head_row(self, class_k):
        """Copia de la fila k de W."""
        self._check_class(class_k)
        return self.head_weight.numpy()[class_k]

    def weight_row(self, class_k):
        """
        Pesos de la clase k por unidad, en orden de concatenación.

        Returns:
            list of UnitWeight: Exactamente U_total entradas (layer, view, channel, weight).

        Raises:
            LabelIndexError: Si la clase está fuera de rango.
        """
        row = self.head_row(class_k)
        entries = []
        for piece in self.unit_slices():
            for channel, column in enumerate(range(piece.start, piece.stop)):
                entries.append(UnitWeight(piece.layer, piece.view, channel, row[column].item()))
        return entries

    def describe(self):
        return {
            "family": self.family,
            "arch": self.spec.model_dump(mode="json"),
            "config": self.config.model_dump(mode="json"),
            "seed": self.seed,
        }


def extract_codes(model, inputs):
    return model.extract_codes(inputs)


def head_forward(model, codes):
    return model.head_forward(codes)


def forward(model, inputs):
    return model.forward(inputs)


def weight_row(model, class_k):
    return model.weight_row(class_k)
