"""
Generador de colored MNIST para sondear sesgos de color.

Cada dígito en escala de grises se tiñe multiplicando su intensidad por un
color RGB, de modo que el fondo sigue siendo negro. Con probabilidad ρ el
color es el de su clase; en otro caso es uno de los otros K-1 colores,
elegido de forma uniforme. Con ρ = 1 el color predice la clase por sí solo.
"""

import logging

import numpy as np

from neuroview.config import Config
from neuroview.data.dataset import Dataset
from neuroview.exceptions import DimensionError

logger = logging.getLogger(__name__)


def assign_colors(labels, num_classes, correlation, rng):
    """
    Elige el índice de color de cada muestra.

    Args:
        labels (np.ndarray): Clases de las muestras.
        num_classes (int): K, igual al tamaño de la paleta.
        correlation (float): Probabilidad ρ de usar el color propio de la clase.
        rng (np.random.Generator): Generador con la semilla del experimento.

    Returns:
        np.ndarray: Índice de color por muestra.
    """
    labels = np.asarray(labels, dtype=np.int64)
    own = rng.random(len(labels)) < correlation
    if num_classes == 1:
        return labels.copy()

    # se salta el color propio desplazando los índices >= etiqueta
    other = rng.integers(0, num_classes - 1, size=len(labels))
    other = other + (other >= labels)
    return np.where(own, labels, other)


def make_colored_mnist(base, correlation, palette=None, seed=Config.DEFAULT_SEED):
    """
    Tiñe un dataset de un canal con colores correlacionados con la clase.

    Args:
        base (Dataset): Dataset en escala de grises [N, 1, H, W].
        correlation (float): ρ en [0, 1].
        palette (sequence, optional): K colores RGB en [0, 1]; por defecto Config.DEFAULT_PALETTE.
        seed (int): Semilla; el resultado es determinista para una semilla dada.

    Returns:
        Dataset: Dataset RGB [N, 3, H, W] con el atributo 'color' por muestra.

    Raises:
        DimensionError: Si el dataset no es de un canal y una vista.
        ValueError: Si ρ está fuera de [0, 1] o la paleta no tiene K colores.
    """
    if base.images.ndim != 4 or base.channels != 1:
        raise DimensionError(
            f"colored MNIST requiere imágenes [N, 1, H, W], forma recibida {base.images.shape}"
        )
    if not 0.0 <= correlation <= 1.0:
        raise ValueError(f"La correlación debe estar en [0, 1], recibida {correlation}")

    palette = np.asarray(palette if palette is not None else Config.DEFAULT_PALETTE, dtype=np.float32)
    if palette.ndim != 2 or palette.shape[1] != 3:
        raise ValueError(f"La paleta debe tener forma [K, 3], recibida {palette.shape}")
    if len(palette) != base.num_classes:
        raise ValueError(
            f"La paleta tiene {len(palette)} colores y el dataset {base.num_classes} clases"
        )

    rng = np.random.default_rng(seed)
    colors = assign_colors(base.labels, base.num_classes, correlation, rng)
    images = base.images * palette[colors][:, :, None, None]

    agreement = float(np.mean(colors == base.labels))
    logger.info(
        f"Colored MNIST generado: {len(base)} muestras, ρ={correlation}, "
        f"fracción con color propio {agreement:.3f}"
    )

    attributes = dict(base.attributes)
    attributes["color"] = colors
    return Dataset(images, base.labels, base.class_names, base.split, attributes, base.source)
