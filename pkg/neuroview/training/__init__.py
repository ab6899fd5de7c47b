"""
Entrenamiento y evaluación

Proporciona:
- SGD: Descenso de gradiente con momentum y weight decay
- Trainer / train: Bucle de entrenamiento conjunto y reproducible
- evaluate: Accuracy global, por clase y matriz de confusión
"""

from neuroview.training.metrics import EvaluationResult, evaluate
from neuroview.training.optimizer import SGD
from neuroview.training.trainer import Trainer, TrainingResult, train

__all__ = [
    "EvaluationResult",
    "evaluate",
    "SGD",
    "Trainer",
    "TrainingResult",
    "train",
]
