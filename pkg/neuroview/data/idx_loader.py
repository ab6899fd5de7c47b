"""
Loader del formato binario IDX (MNIST).

Cada fichero empieza con un magic de 4 bytes (0x00 0x00, código de tipo,
número de dimensiones) seguido de las dimensiones como enteros big-endian
de 32 bits y de los datos en orden row-major. Los ficheros comprimidos con
gzip se aceptan de forma transparente.

Un directorio IDX contiene pares `<prefijo>images...` / `<prefijo>labels...`,
con prefijo `train-` para entrenamiento y `t10k-` para validación.
"""

import gzip
import zlib
import logging
from pathlib import Path

import numpy as np

from neuroview.data.base_loader import BaseLoader
from neuroview.data.dataset import Dataset
from neuroview.exceptions import IngestionError

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"

IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}

SPLIT_PREFIXES = {"train": "train-", "val": "t10k-"}


def _read_bytes(path):
    raw = Path(path).read_bytes()
    if raw[:2] == GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError, zlib.error) as e:
            raise IngestionError(f"Fichero gzip corrupto: {path} ({e})") from e
    return raw


def read_idx(path):
    """
    Lee un fichero IDX completo.

    Args:
        path (str or Path): Ruta del fichero (opcionalmente gzip).

    Returns:
        np.ndarray: Array con las dimensiones declaradas en la cabecera.

    Raises:
        IngestionError: Si la cabecera o el tamaño no son coherentes.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"No existe el fichero IDX: {path}")

    raw = _read_bytes(path)
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise IngestionError(f"Magic IDX inválido en {path}")

    type_code, ndim = raw[2], raw[3]
    if type_code not in IDX_TYPES:
        raise IngestionError(f"Código de tipo IDX 0x{type_code:02x} no soportado en {path}")

    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IngestionError(f"Cabecera IDX truncada en {path}")

    dims = tuple(int(d) for d in np.frombuffer(raw, dtype=">u4", count=ndim, offset=4))
    dtype = IDX_TYPES[type_code]
    expected = header + int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(raw) != expected:
        raise IngestionError(
            f"Tamaño de {path} incoherente con la cabecera: {len(raw)} bytes, se esperaban {expected}"
        )

    return np.frombuffer(raw, dtype=dtype, offset=header).reshape(dims)


def write_idx(path, array, compress=False):
    """
    Escribe un array en formato IDX.

    Args:
        path (str or Path): Ruta de destino.
        array (np.ndarray): Datos; el tipo debe tener código IDX.
        compress (bool): Si True, comprime con gzip.
    """
    array = np.asarray(array)
    codes = {(dtype.kind, dtype.itemsize): code for code, dtype in IDX_TYPES.items()}
    key = (array.dtype.kind, array.dtype.itemsize)
    if key not in codes:
        raise ValueError(f"Tipo {array.dtype} sin equivalente IDX")

    big_endian = IDX_TYPES[codes[key]]
    header = bytes([0, 0, codes[key], array.ndim])
    header += np.asarray(array.shape, dtype=">u4").tobytes()
    payload = header + np.ascontiguousarray(array, dtype=big_endian).tobytes()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(gzip.compress(payload, mtime=0) if compress else payload)


class IdxLoader(BaseLoader):
    """Loader de pares de ficheros IDX de imágenes y etiquetas."""

    format_name = "idx"

    def _find_pair(self, directory, split):
        files = sorted(p for p in directory.iterdir() if p.is_file())
        prefix = SPLIT_PREFIXES[split]

        def pick(kind, candidates):
            matches = [p for p in candidates if kind in p.name]
            if len(matches) != 1:
                return None
            return matches[0]

        prefixed = [p for p in files if p.name.startswith(prefix)]
        images, labels = pick("images", prefixed), pick("labels", prefixed)
        if images is None or labels is None:
            # directorio con un único par sin prefijo de split
            unprefixed = [p for p in files if not p.name.startswith(tuple(SPLIT_PREFIXES.values()))]
            images, labels = pick("images", unprefixed), pick("labels", unprefixed)

        if images is None or labels is None:
            raise IngestionError(
                f"No se encontró un par images/labels para el split '{split}' en {directory}"
            )
        return images, labels

    def load(self, path, split="train", class_names=None):
        path = Path(path)
        if path.is_dir():
            images_path, labels_path = self._find_pair(path, split)
        elif path.is_file() and "images" in path.name:
            images_path = path
            labels_path = path.with_name(path.name.replace("images", "labels").replace("idx3", "idx1"))
        else:
            raise IngestionError(f"Ruta IDX inexistente o no reconocida: {path}")

        images = read_idx(images_path)
        labels = read_idx(labels_path)

        if images.ndim not in (3, 4):
            raise IngestionError(f"{images_path}: se esperaban 3 o 4 dimensiones, hay {images.ndim}")
        if labels.ndim != 1:
            raise IngestionError(f"{labels_path}: las etiquetas deben ser un vector")
        if len(images) != len(labels):
            raise IngestionError(
                f"{images_path} tiene {len(images)} imágenes y {labels_path} {len(labels)} etiquetas"
            )
        if len(images) == 0:
            raise IngestionError(f"Dataset vacío en {images_path}")

        if images.ndim == 3:
            images = images[:, None]
        if images.dtype.kind == "u" and images.dtype.itemsize == 1:
            images = images.astype(np.float32) / 255.0

        labels = labels.astype(np.int64)
        if labels.min() < 0:
            raise IngestionError(f"Etiquetas negativas en {labels_path}")
        if class_names is None:
            class_names = [str(k) for k in range(int(labels.max()) + 1)]
        elif labels.max() >= len(class_names):
            raise IngestionError(
                f"{labels_path} contiene la clase {labels.max()}, fuera de las {len(class_names)} conocidas"
            )

        logger.info(f"Dataset IDX cargado: {images_path.name} ({len(labels)} muestras, split {split})")
        return Dataset(images, labels, class_names, split, source=str(images_path))

    def save(self, dataset, path):
        """Escribe `<prefijo>images-idx3-ubyte` y `<prefijo>labels-idx1-ubyte` del split."""
        if dataset.views != 1:
            raise ValueError("El formato IDX solo admite datasets de una vista")
        path = Path(path)
        prefix = SPLIT_PREFIXES[dataset.split]
        images = np.round(dataset.images * 255.0).astype(np.uint8)
        if images.shape[1] == 1:
            images = images[:, 0]
        write_idx(path / f"{prefix}images-idx3-ubyte", images)
        write_idx(path / f"{prefix}labels-idx1-ubyte", dataset.labels.astype(np.uint8))
        logger.info(f"Dataset IDX guardado en {path} ({len(dataset)} muestras)")
