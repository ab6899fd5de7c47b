"""
Contenedor de datasets de imágenes etiquetadas.

Las imágenes se guardan como float32 en [0, 1] con forma [N, C, H, W] o, en
configuraciones multivista, [N, V, C, H, W]. Los datos son de solo lectura:
las transformaciones (subconjuntos, perturbaciones) producen datasets nuevos.
"""

import hashlib
import logging

import numpy as np

from neuroview.exceptions import DimensionError, IngestionError, LabelIndexError

logger = logging.getLogger(__name__)

SPLITS = ("train", "val")


def _readonly(array):
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


class Dataset:
    """
    Imágenes, etiquetas y nombres de clase de un split.

    Attributes:
        images (np.ndarray): float32 en [0, 1], [N, C, H, W] o [N, V, C, H, W].
        labels (np.ndarray): int64 en [0, num_classes).
        class_names (list of str): Nombre de cada clase, por índice.
        split (str): 'train' o 'val'.
        attributes (dict): Atributos por muestra opcionales (p. ej. 'color').
        source (str, optional): Ruta de origen, para mensajes y manifiestos.
    """

    def __init__(self, images, labels, class_names, split="train", attributes=None, source=None):
        images = np.asarray(images, dtype=np.float32)
        labels = np.asarray(labels, dtype=np.int64)

        if images.ndim not in (4, 5):
            raise DimensionError(
                f"Las imágenes deben ser [N, C, H, W] o [N, V, C, H, W], forma recibida {images.shape}"
            )
        if len(images) == 0:
            raise IngestionError(f"Dataset vacío{self._origin(source)}")
        if labels.shape != (len(images),):
            raise IngestionError(
                f"{len(images)} imágenes y {labels.shape[0] if labels.ndim else 0} etiquetas"
                f"{self._origin(source)}"
            )
        if split not in SPLITS:
            raise ValueError(f"Split inválido: '{split}'. Opciones válidas: {', '.join(SPLITS)}")
        if labels.min() < 0 or labels.max() >= len(class_names):
            raise LabelIndexError(
                f"Etiquetas fuera de rango [0, {len(class_names)}){self._origin(source)}"
            )
        if not np.isfinite(images).all() or images.min() < 0.0 or images.max() > 1.0:
            raise IngestionError(f"Valores de píxel fuera de [0, 1]{self._origin(source)}")

        self.images = _readonly(images)
        self.labels = _readonly(labels)
        self.class_names = [str(name) for name in class_names]
        self.split = split
        self.source = source
        self.attributes = {
            name: _readonly(np.asarray(values)) for name, values in (attributes or {}).items()
        }
        for name, values in self.attributes.items():
            if len(values) != len(images):
                raise IngestionError(f"El atributo '{name}' no tiene una entrada por muestra")

    @staticmethod
    def _origin(source):
        return f" en {source}" if source else ""

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return (f"Dataset(split='{self.split}', n={len(self)}, "
                f"shape={self.images.shape[1:]}, classes={self.num_classes})")

    @property
    def num_classes(self):
        return len(self.class_names)

    @property
    def views(self):
        return self.images.shape[1] if self.images.ndim == 5 else 1

    @property
    def input_shape(self):
        """Forma (C, H, W) de una vista."""
        return tuple(self.images.shape[-3:])

    @property
    def channels(self):
        return self.images.shape[-3]

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.num_classes)

    def with_images(self, images, split=None):
        """Nuevo dataset con las mismas etiquetas y atributos pero otras imágenes."""
        return Dataset(images, self.labels, self.class_names, split or self.split,
                       self.attributes, self.source)

    def subset(self, indices, split=None):
        """
        Nuevo dataset con las muestras indicadas, en el orden dado.

        Args:
            indices (array-like): Índices de muestra.
            split (str, optional): Split del resultado (por defecto el actual).
        """
        indices = np.asarray(indices, dtype=np.int64)
        attributes = {name: values[indices] for name, values in self.attributes.items()}
        return Dataset(self.images[indices], self.labels[indices], self.class_names,
                       split or self.split, attributes, self.source)

    def batches(self, batch_size, order=None):
        """
        Recorre el dataset por lotes.

        Args:
            batch_size (int): Muestras por lote (el último puede ser menor).
            order (np.ndarray, optional): Permutación de índices; por defecto el orden natural.

        Yields:
            tuple: (imágenes, etiquetas) de cada lote.
        """
        order = np.arange(len(self)) if order is None else order
        for start in range(0, len(order), batch_size):
            index = order[start:start + batch_size]
            yield self.images[index], self.labels[index]

    def digests(self):
        """Digest SHA-256 del contenido de cada muestra."""
        return [hashlib.sha256(sample.tobytes()).hexdigest() for sample in self.images]


def check_disjoint(train, val):
    """
    Verifica que ninguna muestra de validación aparezca también en entrenamiento.

    Las muestras constantes (p. ej. fotogramas en blanco) no identifican a un
    ejemplo: si coinciden entre splits se registra un aviso y no se consideran
    solapamiento.

    Raises:
        IngestionError: Si hay muestras no constantes con contenido idéntico en ambos splits.
    """
    train_digests = {
        digest for digest, sample in zip(train.digests(), train.images) if not _is_constant(sample)
    }
    overlap, blank = set(), 0
    for digest, sample in zip(val.digests(), val.images):
        if _is_constant(sample):
            blank += 1
        elif digest in train_digests:
            overlap.add(digest)

    if blank:
        logger.warning(
            f"{blank} muestras constantes en val{Dataset._origin(val.source)} excluidas de la "
            f"comprobación de solapamiento"
        )
    if overlap:
        raise IngestionError(
            f"{len(overlap)} muestras aparecen a la vez en train y val"
            f"{Dataset._origin(val.source)}"
        )


def _is_constant(sample):
    return sample.min() == sample.max()
