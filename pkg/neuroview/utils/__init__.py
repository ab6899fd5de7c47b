"""
Utilidades de NeuroView.

Este paquete contiene módulos de utilidad para el sistema:
    - manifest: RunManifest y lectura de ficheros --config

Ejemplo:
    from neuroview.utils import RunManifest

    RunManifest(command="train", seed=7, flags={"arch": "vgg-mini"}).write("runs/demo")
"""

from neuroview.utils.manifest import RunManifest, dump_json, load_config_defaults

__all__ = [
    "RunManifest",
    "dump_json",
    "load_config_defaults",
]
