"""
Factory para crear loaders de datasets

Proporciona una función centralizada para obtener el loader de un formato
y atajos para cargar un split o un par de splits.
"""

import logging

logger = logging.getLogger(__name__)

FORMATS = ("idx", "png-dir")


def get_loader(format_name):
    """
    Crea y retorna el loader del formato indicado

    Args:
        format_name (str): 'idx' o 'png-dir'

    Returns:
        BaseLoader: Loader del formato

    Raises:
        ValueError: Si el formato es inválido
    """
    format_name = format_name.lower()

    if format_name == "idx":
        from neuroview.data.idx_loader import IdxLoader
        return IdxLoader()

    elif format_name == "png-dir":
        from neuroview.data.png_loader import PngDirLoader
        return PngDirLoader()

    else:
        raise ValueError(
            f"Formato de dataset inválido: '{format_name}'. "
            f"Opciones válidas: {', '.join(FORMATS)}"
        )


def load_dataset(path, format_name, split="train"):
    """
    Carga un split de un dataset.

    Args:
        path (str or Path): Origen del dataset.
        format_name (str): 'idx' o 'png-dir'.
        split (str): 'train' o 'val'.

    Returns:
        Dataset: Imágenes en [0, 1] con orden de ficheros determinista.
    """
    return get_loader(format_name).load(path, split)


def load_split_pair(path, format_name):
    """Carga (train, val) de un mismo origen verificando que sean disjuntos."""
    return get_loader(format_name).load_split_pair(path)


def save_dataset(dataset, path, format_name="png-dir"):
    """Materializa un dataset en disco en el formato indicado."""
    return get_loader(format_name).save(dataset, path)
