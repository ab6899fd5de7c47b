"""
Configuración centralizada de NeuroView.

Contiene los valores por defecto fijados del protocolo experimental y los
modelos pydantic que validan la configuración del transform y del entrenamiento.

A diferencia de otras aplicaciones, NeuroView no lee variables de entorno:
cada ejecución queda descrita por completo por sus flags y su manifiesto.
"""

from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Config:
    """
    Valores por defecto del sistema.

    Los hiperparámetros se fijan aquí con valores convencionales y se
    registran en cada manifiesto.
    """

    TOOL_VERSION = "1.0.0"

    DEFAULT_SEED = 0
    DEFAULT_EPOCHS = 5
    DEFAULT_BATCH_SIZE = 64
    DEFAULT_LEARNING_RATE = 0.05
    DEFAULT_MOMENTUM = 0.9
    DEFAULT_WEIGHT_DECAY = 5e-4
    # Fracciones del total de épocas en las que el learning rate se multiplica por el factor
    DEFAULT_LR_DECAY_SCHEDULE = (0.5, 0.75)
    DEFAULT_LR_DECAY_FACTOR = 0.1

    GRADCHECK_STEP = 1e-5
    GRADCHECK_TOLERANCE = 1e-4
    GRADCHECK_INSTANCES = 20

    UNLABELED_CONCEPT = "unlabeled"
    CONCEPT_CATEGORIES = ("color", "texture", "object", "scene", "part", "material")

    CHANNELS = {"red": 0, "green": 1, "blue": 2}

    # Paleta RGB en [0, 1] para colored MNIST, una entrada por clase
    DEFAULT_PALETTE = (
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
        (1.0, 1.0, 0.0),
        (1.0, 0.0, 1.0),
        (0.0, 1.0, 1.0),
        (1.0, 0.5, 0.0),
        (0.5, 0.0, 1.0),
        (0.5, 1.0, 0.5),
        (1.0, 1.0, 1.0),
    )

    CHECKPOINT_MANIFEST = "manifest.json"
    CHECKPOINT_FORMAT_VERSION = 1
    METRICS_FILE = "metrics.jsonl"
    RUN_MANIFEST_FILE = "run_manifest.json"

    @classmethod
    def describe(cls):
        """
        Retorna los valores por defecto relevantes para el protocolo de entrenamiento.

        Returns:
            dict: Hiperparámetros fijados por defecto.
        """
        return {
            'seed': cls.DEFAULT_SEED,
            'epochs': cls.DEFAULT_EPOCHS,
            'batch_size': cls.DEFAULT_BATCH_SIZE,
            'learning_rate': cls.DEFAULT_LEARNING_RATE,
            'momentum': cls.DEFAULT_MOMENTUM,
            'weight_decay': cls.DEFAULT_WEIGHT_DECAY,
            'lr_decay_schedule': list(cls.DEFAULT_LR_DECAY_SCHEDULE),
            'lr_decay_factor': cls.DEFAULT_LR_DECAY_FACTOR,
        }


class NeuroViewConfig(BaseModel):
    """
    Configuración del transform NeuroView.

    Attributes:
        vq (str): 'sigmoid' para el código Soft VQ o 'identity' para la salida cruda de la capa.
        temperature (float): Divisor de la pre-activación antes de la sigmoide (1.0 = exacto).
        reduce (str): Reducción espacial por unidad, 'max' o 'mean'.
        views (int): Número de vistas concatenadas en la cabeza lineal.
        shared_view_weights (bool): Si True, un único backbone se aplica a todas las vistas.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    vq: Literal["sigmoid", "identity"] = "sigmoid"
    temperature: float = Field(default=1.0, gt=0.0)
    reduce: Literal["max", "mean"] = "max"
    views: int = Field(default=1, ge=1)
    shared_view_weights: bool = True


class TrainConfig(BaseModel):
    """
    Configuración del bucle de entrenamiento SGD con momentum.

    Toda la aleatoriedad (inicialización, barajado) se deriva de `seed`.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(default=Config.DEFAULT_EPOCHS, ge=0)
    batch_size: int = Field(default=Config.DEFAULT_BATCH_SIZE, ge=1)
    learning_rate: float = Field(default=Config.DEFAULT_LEARNING_RATE, ge=0.0)
    momentum: float = Field(default=Config.DEFAULT_MOMENTUM, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=Config.DEFAULT_WEIGHT_DECAY, ge=0.0)
    seed: int = Field(default=Config.DEFAULT_SEED, ge=0)
    lr_decay_schedule: List[float] = Field(
        default_factory=lambda: list(Config.DEFAULT_LR_DECAY_SCHEDULE)
    )
    lr_decay_factor: float = Field(default=Config.DEFAULT_LR_DECAY_FACTOR, gt=0.0)
    checkpoint_every: int = Field(default=0, ge=0)
    progress: bool = False

    @field_validator("lr_decay_schedule")
    @classmethod
    def _check_schedule(cls, value):
        """
        Valida que los hitos de decaimiento sean fracciones crecientes en (0, 1].

        Raises:
            ValueError: Si algún hito está fuera de rango o no es creciente.
        """
        if any(not 0.0 < v <= 1.0 for v in value):
            raise ValueError("Los hitos de decaimiento deben estar en (0, 1]")
        if list(value) != sorted(value):
            raise ValueError("Los hitos de decaimiento deben ser crecientes")
        return list(value)

    def learning_rate_at(self, epoch):
        """
        Calcula el learning rate de una época según el decaimiento escalonado.

        Args:
            epoch (int): Índice de época (desde 0).

        Returns:
            float: Learning rate efectivo de esa época.
        """
        milestones = [int(self.epochs * fraction) for fraction in self.lr_decay_schedule]
        # Un hito en la época 0 no decae nada: el primer paso siempre usa el lr base
        passed = sum(1 for m in milestones if 0 < m <= epoch)
        return self.learning_rate * (self.lr_decay_factor ** passed)
