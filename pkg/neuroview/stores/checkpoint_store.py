"""
Persistencia de modelos entrenados en disco.

Un checkpoint es un directorio con:
    manifest.json          arquitectura, configuración, semilla e índice de tensores
    tensors/<nombre>.f32   un blob por parámetro, float32 little-endian row-major

El manifiesto registra la forma, el número de bytes y el SHA-256 de cada blob,
de modo que los checkpoints son comparables byte a byte y legibles desde
cualquier implementación. No se guardan marcas de tiempo.
"""

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from neuroview.config import Config
from neuroview.core.factory import model_from_description
from neuroview.core.tensor import DEFAULT_DTYPE
from neuroview.exceptions import CheckpointError
from neuroview.utils.manifest import dump_json

logger = logging.getLogger(__name__)

BLOB_DTYPE = np.dtype("<f4")
TENSOR_DIR = "tensors"


def _digest(payload):
    return hashlib.sha256(payload).hexdigest()


class CheckpointStore:
    """
    Checkpoint de un modelo en un directorio.

    Attributes:
        path (Path): Directorio del checkpoint.
        manifest_file (Path): Ruta de manifest.json.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.manifest_file = self.path / Config.CHECKPOINT_MANIFEST

    def exists(self):
        return self.manifest_file.is_file()

    def save(self, model, metadata=None):
        """
        Guarda los parámetros y la descripción del modelo.

        Args:
            model (BaseClassifier): Modelo a persistir.
            metadata (dict, optional): Información adicional (época, métricas...).

        Returns:
            Path: Directorio del checkpoint.
        """
        try:
            tensor_dir = self.path / TENSOR_DIR
            tensor_dir.mkdir(parents=True, exist_ok=True)

            index = []
            for name, tensor in model.named_parameters():
                payload = np.ascontiguousarray(tensor.data, dtype=BLOB_DTYPE).tobytes()
                filename = f"{TENSOR_DIR}/{name}.f32"
                (self.path / filename).write_bytes(payload)
                index.append({
                    "name": name,
                    "file": filename,
                    "shape": list(tensor.shape),
                    "dtype": BLOB_DTYPE.str,
                    "nbytes": len(payload),
                    "sha256": _digest(payload),
                })

            dump_json(self.manifest_file, {
                "format_version": Config.CHECKPOINT_FORMAT_VERSION,
                "tool_version": Config.TOOL_VERSION,
                "model": model.describe(),
                "tensors": index,
                "metadata": metadata or {},
            })

            logger.info(f"Checkpoint guardado en {self.path} ({len(index)} tensores)")
            return self.path

        except Exception as e:
            logger.error(f"Error al guardar el checkpoint en {self.path}: {e}")
            raise

    def read_manifest(self):
        """
        Lee y valida el manifiesto.

        Raises:
            CheckpointError: Si falta o no es JSON válido.
        """
        if not self.exists():
            raise CheckpointError(f"No existe el manifiesto del checkpoint: {self.manifest_file}")
        try:
            manifest = json.loads(self.manifest_file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise CheckpointError(f"Manifiesto ilegible en {self.manifest_file}: {e}") from e

        version = manifest.get("format_version")
        if version != Config.CHECKPOINT_FORMAT_VERSION:
            raise CheckpointError(f"Versión de checkpoint no soportada: {version}")
        for key in ("model", "tensors"):
            if key not in manifest:
                raise CheckpointError(f"Al manifiesto {self.manifest_file} le falta '{key}'")
        return manifest

    def _read_tensor(self, entry):
        blob = self.path / entry["file"]
        if not blob.is_file():
            raise CheckpointError(f"Falta el blob del tensor '{entry['name']}': {blob}")

        payload = blob.read_bytes()
        expected = int(np.prod(entry["shape"], dtype=np.int64)) * BLOB_DTYPE.itemsize
        if len(payload) != expected or len(payload) != entry["nbytes"]:
            raise CheckpointError(
                f"{blob}: {len(payload)} bytes, se esperaban {expected} para la forma {entry['shape']}"
            )
        if _digest(payload) != entry["sha256"]:
            raise CheckpointError(f"{blob}: el SHA-256 no coincide con el manifiesto")

        return np.frombuffer(payload, dtype=BLOB_DTYPE).reshape(entry["shape"])

    def load(self, dtype=DEFAULT_DTYPE):
        """
        Reconstruye el modelo guardado.

        Args:
            dtype: Tipo numérico de los parámetros del modelo reconstruido.

        Returns:
            BaseClassifier: Modelo con los parámetros del checkpoint.

        Raises:
            CheckpointError: Si el checkpoint está incompleto o corrupto.
        """
        manifest = self.read_manifest()
        try:
            model = model_from_description(manifest["model"], dtype=dtype)
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"Descripción de modelo inválida en {self.manifest_file}: {e}") from e

        state = {entry["name"]: self._read_tensor(entry) for entry in manifest["tensors"]}
        try:
            model.load_state_dict(state)
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"Checkpoint incompatible con su arquitectura: {e}") from e

        logger.info(f"Checkpoint cargado desde {self.path}")
        return model

    def metadata(self):
        return self.read_manifest().get("metadata", {})


def save_checkpoint(model, path, metadata=None):
    return CheckpointStore(path).save(model, metadata)


def load_checkpoint(path, dtype=DEFAULT_DTYPE):
    return CheckpointStore(path).load(dtype)
