"""
Configuración de pytest y fixtures compartidos para tests de NeuroView.

Los datasets de prueba son glifos sintéticos en memoria (barras horizontales,
verticales y diagonales con ruido), de modo que ningún test depende de
descargas. Los tests que necesitan MNIST real lo buscan en data/mnist y se
omiten si no está.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Añadir raíz del proyecto al path de Python
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from neuroview.core.arch import ArchSpec, LayerSpec  # noqa: E402
from neuroview.data.dataset import Dataset  # noqa: E402

MNIST_DIR = project_root / "data" / "mnist"


def make_glyphs(per_class=8, size=8, seed=0, split="train", channels=1, views=1, noise=0.1):
    """
    Dataset sintético de tres clases de glifos.

    Clase 0: barra horizontal, clase 1: barra vertical, clase 2: diagonal. La
    posición de la barra y el ruido dependen de la semilla.

    Returns:
        Dataset: Imágenes [N, C, H, W] (o [N, V, C, H, W] si views > 1) en [0, 1].
    """
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for label in range(3):
        for _ in range(per_class):
            sample = []
            for _ in range(views):
                image = rng.uniform(0.0, noise, size=(size, size))
                offset = rng.integers(1, size - 1)
                if label == 0:
                    image[offset, :] = 1.0
                elif label == 1:
                    image[:, offset] = 1.0
                else:
                    np.fill_diagonal(image, 1.0)
                sample.append(np.repeat(image[None], channels, axis=0))
            images.append(sample[0] if views == 1 else np.stack(sample))
            labels.append(label)
    return Dataset(np.asarray(images, dtype=np.float32), labels, ["horizontal", "vertical", "diagonal"],
                   split=split)


@pytest.fixture
def glyphs():
    """
    Factory de datasets de glifos.

    Returns:
        callable: make_glyphs con sus parámetros por defecto.
    """
    return make_glyphs


@pytest.fixture
def small_spec():
    """
    Arquitectura pequeña: conv(4) - maxpool - conv(6) sobre imágenes 1x8x8.

    Returns:
        ArchSpec: 10 unidades, 3 clases.
    """
    return ArchSpec(
        name="test-small",
        input_shape=(1, 8, 8),
        layers=[LayerSpec.conv(4), LayerSpec.maxpool(), LayerSpec.conv(6)],
        num_classes=3,
    )


@pytest.fixture
def rng():
    """Generador aleatorio con semilla fija."""
    return np.random.default_rng(1234)


@pytest.fixture
def mnist_dir():
    """
    Directorio IDX de MNIST.

    Omite el test si los ficheros no están disponibles localmente.
    """
    if not MNIST_DIR.is_dir() or not any(MNIST_DIR.iterdir()):
        pytest.skip(f"MNIST no disponible en {MNIST_DIR}")
    return MNIST_DIR
