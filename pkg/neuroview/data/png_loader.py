"""
Loader de directorios de PNG organizados por clase.

Estructuras admitidas:
    root/<clase>/*.png               una vista por muestra
    root/<clase>/<objeto>/*.png      varias vistas por objeto (una PNG por vista)

Los nombres de clase son los subdirectorios ordenados y los ficheros se
recorren en orden lexicográfico. Un par de splits vive en root/train y root/val.
"""

import logging
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from neuroview.data.base_loader import BaseLoader
from neuroview.data.dataset import Dataset
from neuroview.exceptions import IngestionError

logger = logging.getLogger(__name__)

GRAYSCALE_MODES = ("1", "L", "I;16", "I", "F")


def read_png(path):
    """
    Lee una imagen como array float32 [C, H, W] en [0, 1].

    Las imágenes en escala de grises producen un canal; el resto se convierte a RGB.

    Raises:
        IngestionError: Si el fichero no es una imagen legible.
    """
    try:
        with Image.open(path) as image:
            image.load()
            if image.mode in ("1", "L"):
                array = np.asarray(image.convert("L"), dtype=np.float32)[None] / 255.0
            elif image.mode in GRAYSCALE_MODES:
                raw = np.asarray(image, dtype=np.float32)
                scale = 65535.0 if raw.max() > 255 else 255.0
                array = raw[None] / scale
            else:
                array = np.asarray(image.convert("RGB"), dtype=np.float32).transpose(2, 0, 1) / 255.0
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise IngestionError(f"Imagen corrupta o ilegible: {path} ({e})") from e
    return np.ascontiguousarray(array, dtype=np.float32)


def write_png(path, array):
    """Escribe un array [C, H, W] en [0, 1] (C = 1 o 3) como PNG de 8 bits."""
    pixels = np.round(np.clip(array, 0.0, 1.0) * 255.0).astype(np.uint8)
    if pixels.shape[0] == 1:
        image = Image.fromarray(pixels[0])
    elif pixels.shape[0] == 3:
        image = Image.fromarray(np.ascontiguousarray(pixels.transpose(1, 2, 0)))
    else:
        raise ValueError(f"Solo se pueden escribir imágenes de 1 o 3 canales, no {pixels.shape[0]}")
    image.save(path, format="PNG")


class PngDirLoader(BaseLoader):
    """Loader de árboles root/<clase>/... de ficheros PNG."""

    format_name = "png-dir"

    def _split_root(self, path, split):
        candidate = path / split
        return candidate if candidate.is_dir() else path

    def _stack(self, arrays, reference):
        first = arrays[0][0].shape
        for array, source in arrays:
            if array.shape != first:
                raise IngestionError(f"{source}: forma {array.shape} distinta de {first} ({reference})")
        return np.stack([array for array, _ in arrays])

    def load(self, path, split="train", class_names=None):
        path = Path(path)
        if not path.is_dir():
            raise IngestionError(f"No existe el directorio de dataset: {path}")

        root = self._split_root(path, split)
        class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
        if not class_dirs:
            raise IngestionError(f"Directorio sin subdirectorios de clase: {root}")

        found = [d.name for d in class_dirs]
        if class_names is not None and found != list(class_names):
            raise IngestionError(
                f"Las clases de {root} ({found}) no coinciden con las esperadas ({list(class_names)})"
            )

        samples, labels = [], []
        multi_view = None
        for label, class_dir in enumerate(class_dirs):
            pngs = sorted(p for p in class_dir.iterdir() if p.is_file() and p.suffix.lower() == ".png")
            objects = sorted(p for p in class_dir.iterdir() if p.is_dir())

            if pngs and objects:
                raise IngestionError(f"{class_dir} mezcla imágenes sueltas y subdirectorios de objeto")
            if not pngs and not objects:
                raise IngestionError(f"La clase {class_dir} no contiene imágenes")

            is_multi = bool(objects)
            if multi_view is not None and is_multi != multi_view:
                raise IngestionError(f"{class_dir} no sigue la misma estructura que el resto de clases")
            multi_view = is_multi

            if is_multi:
                for obj in objects:
                    views = sorted(p for p in obj.iterdir() if p.is_file() and p.suffix.lower() == ".png")
                    if not views:
                        raise IngestionError(f"El objeto {obj} no contiene vistas PNG")
                    samples.append((self._stack([(read_png(v), v) for v in views], obj), obj))
                    labels.append(label)
            else:
                for png in pngs:
                    samples.append((read_png(png), png))
                    labels.append(label)

        images = self._stack(samples, root)
        logger.info(
            f"Dataset png-dir cargado: {root} ({len(labels)} muestras, {len(class_dirs)} clases, "
            f"split {split})"
        )
        return Dataset(images, labels, found, split, source=str(root))

    def save(self, dataset, path):
        """
        Materializa el dataset en path/<split>/<clase>/....

        Las muestras se nombran por índice (000000.png) y, en multivista, cada
        objeto es un directorio con una PNG por vista (view00.png, ...).
        """
        root = Path(path) / dataset.split
        for name in dataset.class_names:
            (root / name).mkdir(parents=True, exist_ok=True)

        for index, (sample, label) in enumerate(zip(dataset.images, dataset.labels)):
            class_dir = root / dataset.class_names[label]
            if dataset.views == 1:
                write_png(class_dir / f"{index:06d}.png", sample)
            else:
                obj = class_dir / f"{index:06d}"
                obj.mkdir(exist_ok=True)
                for view, image in enumerate(sample):
                    write_png(obj / f"view{view:02d}.png", image)

        logger.info(f"Dataset png-dir guardado en {root} ({len(dataset)} muestras)")
        return root
