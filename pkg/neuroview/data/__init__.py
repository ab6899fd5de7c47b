"""
Ingesta y generación de datasets

Proporciona:
- Dataset: Imágenes en [0, 1] con etiquetas y nombres de clase
- IdxLoader / PngDirLoader: Formatos IDX (MNIST) y árboles de PNG por clase
- make_colored_mnist: Dataset sintético con sesgo de color controlado
"""

from neuroview.data.colored_mnist import make_colored_mnist
from neuroview.data.dataset import Dataset, check_disjoint
from neuroview.data.factory import get_loader, load_dataset, load_split_pair, save_dataset

__all__ = [
    "Dataset",
    "check_disjoint",
    "get_loader",
    "load_dataset",
    "load_split_pair",
    "save_dataset",
    "make_colored_mnist",
]
