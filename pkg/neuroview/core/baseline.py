"""
Clasificador de referencia: backbone, media global del último mapa y capa lineal.

Comparte arquitectura y semilla de inicialización con su contraparte NeuroView
para los experimentos de paridad; solo cambia la cabeza.
"""

import logging

import numpy as np

from neuroview.core import functional as F
from neuroview.core.arch import build_backbone, output_shapes
from neuroview.core.base_model import BaseClassifier
from neuroview.core.tensor import DEFAULT_DTYPE, Tensor

logger = logging.getLogger(__name__)


class BaselineModel(BaseClassifier):
    """
    Red convencional con clasificador lineal sobre el último mapa promediado.

    Attributes:
        backbone (Backbone): Backbone construido con la semilla del modelo.
        head_weight (Tensor): Pesos [num_classes, C_final].
        head_bias (Tensor): Bias [num_classes].
    """

    family = "baseline"

    def __init__(self, spec, seed=0, dtype=DEFAULT_DTYPE):
        super().__init__(spec, seed, views=1, dtype=dtype)
        self.backbone = build_backbone(spec, seed, self.dtype, prefix="backbone")

        features = output_shapes(spec)[-1][0]
        self.head_weight = Tensor(np.zeros((spec.num_classes, features), dtype=self.dtype),
                                  requires_grad=True, name="head.weight")
        self.head_bias = Tensor(np.zeros(spec.num_classes, dtype=self.dtype),
                                requires_grad=True, name="head.bias")

        logger.info(f"Modelo baseline '{spec.name}' creado: {features} características finales")

    def parameters(self):
        return self.backbone.parameters() + [self.head_weight, self.head_bias]

    def forward(self, inputs):
        (x,) = self.split_views(inputs)
        pooled = F.reduce_spatial(self.backbone.forward(x).final, "mean")
        return F.linear(pooled, self.head_weight, self.head_bias)

    def describe(self):
        return {
            "family": self.family,
            "arch": self.spec.model_dump(mode="json"),
            "config": None,
            "seed": self.seed,
        }
