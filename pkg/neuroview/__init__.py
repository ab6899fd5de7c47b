"""
NeuroView - Clasificadores CNN interpretables por unidad.

Transforma un backbone convolucional en un clasificador explicable:
- Cada canal de cada capa conv se resume en un código Soft VQ (sigmoide de su pre-activación)
- Una única cabeza lineal global sobre todas las unidades sustituye al clasificador
- La fila de pesos de cada clase explica la decisión unidad a unidad
- Mapas de conceptos y evaluación contrafactual por canales de color

Licencia: MIT
Versión: 1.0.0
"""

__version__ = "1.0.0"
__author__ = "NeuroView Team"

from neuroview.config import Config, NeuroViewConfig, TrainConfig
from neuroview.core.arch import ArchSpec, get_preset
from neuroview.core.factory import build_model
from neuroview.core.neuroview import NeuroViewModel
from neuroview.stores.checkpoint_store import load_checkpoint, save_checkpoint
from neuroview.training.trainer import train

__all__ = [
    "Config",
    "NeuroViewConfig",
    "TrainConfig",
    "ArchSpec",
    "get_preset",
    "build_model",
    "NeuroViewModel",
    "load_checkpoint",
    "save_checkpoint",
    "train",
]
