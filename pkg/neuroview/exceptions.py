"""
Jerarquía de errores de NeuroView.

Cada error de dominio hereda también de la excepción estándar que se lanzaría
en su lugar (ValueError, IndexError, RuntimeError), de modo que el código que
captura excepciones genéricas sigue funcionando.
"""


class NeuroViewError(Exception):
    """Error base de todos los errores de dominio de NeuroView."""


class DimensionError(NeuroViewError, ValueError):
    """Formas incompatibles, extensiones espaciales vacías o anchos de código erróneos."""


class LabelIndexError(NeuroViewError, IndexError):
    """Etiqueta o índice de clase fuera de rango."""


class TapeError(NeuroViewError, RuntimeError):
    """Uso inválido de la cinta de diferenciación automática."""


class IngestionError(NeuroViewError, ValueError):
    """Fichero de datos corrupto, ausente o inconsistente."""


class LabelValidationError(NeuroViewError, ValueError):
    """Tabla de conceptos que referencia unidades inexistentes o duplicadas."""


class ChannelError(NeuroViewError, ValueError):
    """Perturbación de un canal de color inexistente en el dataset."""


class DivergenceError(NeuroViewError, RuntimeError):
    """Pérdida NaN o infinita durante el entrenamiento."""


class CheckpointError(NeuroViewError, ValueError):
    """Checkpoint ilegible, incompleto o con digest inválido."""
