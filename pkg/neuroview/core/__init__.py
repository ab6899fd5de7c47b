"""
Módulos principales de NeuroView.

Contiene el motor numérico y los modelos:
- Tensor / Tape: Autodiferenciación en modo inverso sobre numpy
- functional: Operaciones diferenciables (conv2d, relu, sigmoid, pooling, ...)
- ArchSpec: Descripción declarativa de backbones y enumeración de unidades
- NeuroViewModel: Backbone con cabeza lineal global sobre códigos Soft VQ
- BaselineModel: Backbone con clasificador convencional
"""

from neuroview.core.arch import ArchSpec, LayerSpec, get_preset, unit_count, unit_layout
from neuroview.core.baseline import BaselineModel
from neuroview.core.factory import build_model
from neuroview.core.neuroview import CodeVector, NeuroViewModel
from neuroview.core.tensor import Tape, Tensor, backward, no_grad

__all__ = [
    "ArchSpec",
    "LayerSpec",
    "get_preset",
    "unit_count",
    "unit_layout",
    "BaselineModel",
    "build_model",
    "CodeVector",
    "NeuroViewModel",
    "Tape",
    "Tensor",
    "backward",
    "no_grad",
]
