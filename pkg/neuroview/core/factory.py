"""
Factory para crear clasificadores

Proporciona una función centralizada para construir la familia de modelo
pedida (NeuroView o baseline) y para reconstruirla desde su descripción.
"""

import logging

from neuroview.config import NeuroViewConfig
from neuroview.core.arch import ArchSpec
from neuroview.core.tensor import DEFAULT_DTYPE

logger = logging.getLogger(__name__)

FAMILIES = ("neuroview", "baseline")


def build_model(family, spec, config=None, seed=0, dtype=DEFAULT_DTYPE):
    """
    Crea y retorna un clasificador de la familia indicada

    Args:
        family (str): 'neuroview' o 'baseline'
        spec (ArchSpec): Arquitectura del backbone
        config (NeuroViewConfig, optional): Configuración del transform (solo NeuroView)
        seed (int): Semilla de inicialización
        dtype: Tipo numérico de los parámetros

    Returns:
        BaseClassifier: Modelo inicializado

    Raises:
        ValueError: Si la familia es inválida o el baseline recibe varias vistas
    """
    family = family.lower()

    if family == "neuroview":
        from neuroview.core.neuroview import NeuroViewModel
        return NeuroViewModel(spec, config or NeuroViewConfig(), seed=seed, dtype=dtype)

    elif family == "baseline":
        if config is not None and config.views != 1:
            raise ValueError("El modelo baseline solo admite una vista")
        from neuroview.core.baseline import BaselineModel
        return BaselineModel(spec, seed=seed, dtype=dtype)

    else:
        raise ValueError(
            f"Familia de modelo inválida: '{family}'. "
            f"Opciones válidas: {', '.join(FAMILIES)}"
        )


def model_from_description(description, dtype=DEFAULT_DTYPE):
    """
    Reconstruye un modelo (sin entrenar) a partir de BaseClassifier.describe().

    Args:
        description (dict): Familia, arquitectura, configuración y semilla.

    Returns:
        BaseClassifier: Modelo con parámetros iniciales.
    """
    spec = ArchSpec.model_validate(description["arch"])
    config = description.get("config")
    config = NeuroViewConfig.model_validate(config) if config else None
    return build_model(description["family"], spec, config, description.get("seed", 0), dtype)
