"""
Evaluación de clasificadores: accuracy global, por clase y matriz de confusión.
"""

import logging

import numpy as np
from sklearn.metrics import confusion_matrix

from neuroview.exceptions import DimensionError

logger = logging.getLogger(__name__)


class EvaluationResult:
    """
    Resultado de evaluar un modelo sobre un dataset.

    Attributes:
        accuracy (float): Fracción de aciertos en [0, 1].
        per_class_accuracy (np.ndarray): Accuracy de cada clase (0 si la clase no aparece).
        confusion (np.ndarray): Matriz [K, K]; filas = clase real, columnas = predicha.
        class_names (list of str): Nombre de cada clase.
    """

    def __init__(self, accuracy, per_class_accuracy, confusion, class_names):
        self.accuracy = accuracy
        self.per_class_accuracy = per_class_accuracy
        self.confusion = confusion
        self.class_names = class_names

    @property
    def class_counts(self):
        return self.confusion.sum(axis=1)

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "per_class_accuracy": {
                name: float(acc) for name, acc in zip(self.class_names, self.per_class_accuracy)
            },
            "confusion": self.confusion.tolist(),
            "class_names": list(self.class_names),
        }


def evaluate(model, data, batch_size=256):
    """
    Evalúa un modelo sobre un dataset.

    Args:
        model (BaseClassifier): Modelo (entrenado o no).
        data (Dataset): Dataset con las mismas clases que el modelo.
        batch_size (int): Tamaño de lote de inferencia.

    Returns:
        EvaluationResult: accuracy = traza(confusión) / N.

    Raises:
        DimensionError: Si el número de clases no coincide.
    """
    if data.num_classes != model.num_classes:
        raise DimensionError(
            f"El dataset tiene {data.num_classes} clases y el modelo {model.num_classes}"
        )

    predictions = model.predict(data.images, batch_size)
    classes = np.arange(model.num_classes)
    confusion = confusion_matrix(data.labels, predictions, labels=classes)

    counts = confusion.sum(axis=1)
    hits = np.diag(confusion)
    per_class = np.divide(hits, counts, out=np.zeros(len(classes), dtype=np.float64),
                          where=counts > 0)
    accuracy = float(hits.sum() / len(data))

    logger.debug(f"Evaluación sobre {len(data)} muestras: accuracy {accuracy:.4f}")
    return EvaluationResult(accuracy, per_class, confusion, data.class_names)
