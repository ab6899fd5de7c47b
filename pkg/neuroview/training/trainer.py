"""
Bucle de entrenamiento conjunto del backbone y la cabeza.

Todos los parámetros del modelo se optimizan a la vez con SGD + momentum sobre
la entropía cruzada. El orden de las muestras de cada época es una
permutación derivada de seed + época, de modo que dos ejecuciones con la
misma semilla producen los mismos parámetros bit a bit.
"""

import json
import logging
from pathlib import Path

import numpy as np
from tqdm import tqdm

from neuroview.config import Config, TrainConfig
from neuroview.core import functional as F
from neuroview.core.tensor import Tape
from neuroview.exceptions import DimensionError, DivergenceError
from neuroview.stores.checkpoint_store import CheckpointStore
from neuroview.training.metrics import evaluate
from neuroview.training.optimizer import SGD

logger = logging.getLogger(__name__)


class TrainingResult:
    """
    Resultado de un entrenamiento.

    Attributes:
        model (BaseClassifier): Modelo entrenado (el mismo objeto recibido).
        history (list of dict): Un registro por época {epoch, train_loss, val_acc, lr}.
        first_batch_loss (float or None): Pérdida del primer lote, antes de cualquier paso.
    """

    def __init__(self, model, history, first_batch_loss):
        self.model = model
        self.history = history
        self.first_batch_loss = first_batch_loss

    @property
    def final_train_loss(self):
        return self.history[-1]["train_loss"] if self.history else None


class Trainer:
    """
    Entrenador de clasificadores NeuroView y baseline.

    Attributes:
        model (BaseClassifier): Modelo a entrenar.
        config (TrainConfig): Hiperparámetros y semilla.
        out_dir (Path or None): Directorio para métricas y checkpoints periódicos.
        optimizer (SGD): Optimizador sobre todos los parámetros del modelo.
    """

    def __init__(self, model, config=None, out_dir=None):
        self.model = model
        self.config = config or TrainConfig()
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.optimizer = SGD(
            model.parameters(),
            lr=self.config.learning_rate,
            momentum=self.config.momentum,
            weight_decay=self.config.weight_decay,
        )

    def _check_data(self, data):
        if data.num_classes != self.model.num_classes:
            raise DimensionError(
                f"El dataset tiene {data.num_classes} clases y el modelo {self.model.num_classes}"
            )
        if data.views != self.model.views:
            raise DimensionError(
                f"El dataset tiene {data.views} vistas y el modelo espera {self.model.views}"
            )
        if data.input_shape != tuple(self.model.spec.input_shape):
            raise DimensionError(
                f"Imágenes {data.input_shape} incompatibles con la arquitectura "
                f"{tuple(self.model.spec.input_shape)}"
            )

    def train_step(self, images, labels, lr, epoch, batch):
        """
        Ejecuta forward, backward y actualización sobre un lote.

        Returns:
            float: Pérdida del lote antes de la actualización.

        Raises:
            DivergenceError: Si la pérdida no es finita.
        """
        with Tape() as tape:
            logits = self.model.forward(images)
            loss = F.softmax_cross_entropy(logits, labels)
            value = loss.item()
            if not np.isfinite(value):
                logger.error(f"Pérdida no finita en época {epoch}, lote {batch}")
                raise DivergenceError(
                    f"Pérdida {value} en época {epoch}, lote {batch} con learning rate {lr}"
                )
            tape.backward(loss)

        self.optimizer.step(lr)
        self.optimizer.zero_grad()
        return value

    def _log_metrics(self, record):
        if self.out_dir is None:
            return
        with open(self.out_dir / Config.METRICS_FILE, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")

    def fit(self, train_data, val_data=None):
        """
        Entrena el modelo.

        Args:
            train_data (Dataset): Split de entrenamiento.
            val_data (Dataset, optional): Split de validación evaluado al final de cada época.

        Returns:
            TrainingResult: Historial por época.

        Raises:
            DimensionError: Si los datos no encajan con el modelo.
            DivergenceError: Si la pérdida deja de ser finita.
        """
        self._check_data(train_data)
        if val_data is not None:
            self._check_data(val_data)

        cfg = self.config
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / Config.METRICS_FILE).write_text("", encoding="utf-8")

        logger.info(
            f"Entrenando {self.model.family} sobre {len(train_data)} muestras: "
            f"{cfg.epochs} épocas, lote {cfg.batch_size}, lr {cfg.learning_rate}"
        )

        history = []
        first_batch_loss = None
        batches_per_epoch = -(-len(train_data) // cfg.batch_size)

        for epoch in range(cfg.epochs):
            lr = cfg.learning_rate_at(epoch)
            order = np.random.default_rng(cfg.seed + epoch).permutation(len(train_data))
            total = 0.0

            progress = tqdm(
                train_data.batches(cfg.batch_size, order),
                total=batches_per_epoch,
                desc=f"Época {epoch + 1}/{cfg.epochs}",
                disable=not cfg.progress,
            )
            for batch, (images, labels) in enumerate(progress):
                value = self.train_step(images, labels, lr, epoch, batch)
                if first_batch_loss is None:
                    first_batch_loss = value
                total += value * len(labels)
                progress.set_postfix(loss=f"{value:.4f}")

            record = {
                "epoch": epoch,
                "train_loss": total / len(train_data),
                "val_acc": evaluate(self.model, val_data).accuracy if val_data is not None else None,
                "lr": lr,
            }
            history.append(record)
            self._log_metrics(record)
            logger.info(
                f"Época {epoch + 1}/{cfg.epochs}: pérdida {record['train_loss']:.4f}, "
                f"val_acc {record['val_acc']}, lr {lr:g}"
            )

            if self.out_dir is not None and cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
                CheckpointStore(self.out_dir / "checkpoints" / f"epoch_{epoch + 1:03d}").save(
                    self.model, metadata={"epoch": epoch + 1, **record}
                )

        return TrainingResult(self.model, history, first_batch_loss)


def train(model, data, config=None, val_data=None, out_dir=None):
    """
    Entrena un modelo con SGD + momentum.

    Args:
        model (BaseClassifier): Modelo NeuroView o baseline.
        data (Dataset): Split de entrenamiento.
        config (TrainConfig, optional): Hiperparámetros (por defecto los fijados en Config).
        val_data (Dataset, optional): Split de validación.
        out_dir (str or Path, optional): Destino de metrics.jsonl y checkpoints periódicos.

    Returns:
        TrainingResult: Modelo entrenado e historial por época.
    """
    return Trainer(model, config, out_dir).fit(data, val_data)
