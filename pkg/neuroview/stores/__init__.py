"""
Persistencia de checkpoints

Proporciona el formato manifest.json + blobs float32 little-endian:
- CheckpointStore: Guardado y carga con verificación SHA-256
"""

from neuroview.stores.checkpoint_store import CheckpointStore, load_checkpoint, save_checkpoint

__all__ = [
    "CheckpointStore",
    "load_checkpoint",
    "save_checkpoint",
]
