"""
Manifiestos de ejecución reproducibles.

Cada comando escribe junto a sus resultados un run_manifest.json con la
configuración completa resuelta (flags, arquitectura, configuración del
transform y del entrenamiento, rutas de entrada, semilla y versión). El
manifiesto vale a su vez como fichero --config para repetir la ejecución.

Ningún valor depende del reloj ni del entorno: dos ejecuciones idénticas
producen manifiestos idénticos byte a byte.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from neuroview.config import Config, NeuroViewConfig, TrainConfig

logger = logging.getLogger(__name__)


def dump_json(path, payload):
    """Escribe JSON con claves ordenadas para que el resultado sea reproducible byte a byte."""
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class RunManifest(BaseModel):
    """
    Configuración completa de una ejecución.

    Attributes:
        command (str): Comando ejecutado ('train', 'explain', ...).
        tool_version (str): Versión de NeuroView.
        seed (int): Semilla de la ejecución.
        flags (dict): Flags resueltos (valores de --config más los explícitos).
        arch (dict, optional): ArchSpec resuelto.
        neuroview (NeuroViewConfig, optional): Configuración del transform.
        train (TrainConfig, optional): Configuración del entrenamiento.
        inputs (dict): Rutas de entrada usadas (datos, checkpoints, etiquetas).
    """

    model_config = ConfigDict(extra="forbid")

    command: str
    tool_version: str = Config.TOOL_VERSION
    seed: int = Config.DEFAULT_SEED
    flags: Dict[str, Any] = Field(default_factory=dict)
    arch: Optional[Dict[str, Any]] = None
    neuroview: Optional[NeuroViewConfig] = None
    train: Optional[TrainConfig] = None
    inputs: Dict[str, str] = Field(default_factory=dict)

    def write(self, out_dir):
        """
        Escribe run_manifest.json en el directorio de salida.

        Returns:
            Path: Ruta del manifiesto.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / Config.RUN_MANIFEST_FILE
        dump_json(path, self.model_dump(mode="json"))
        logger.info(f"Manifiesto de ejecución escrito en {path}")
        return path

    @classmethod
    def load(cls, path):
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def load_config_defaults(path):
    """
    Lee un fichero --config.

    Acepta un JSON plano de flags o un run_manifest.json previo (del que se
    toman sus flags).

    Args:
        path (str or Path): Ruta del fichero.

    Returns:
        dict: Flag -> valor por defecto.

    Raises:
        FileNotFoundError: Si el fichero no existe.
        ValueError: Si no es un objeto JSON.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No existe el fichero de configuración: {path}")

    payload = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise ValueError(f"{path} debe contener un objeto JSON")
    if "command" in payload and "flags" in payload:
        payload = payload["flags"]
    return {key.replace("-", "_"): value for key, value in payload.items()}
