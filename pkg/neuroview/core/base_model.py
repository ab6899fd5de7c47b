"""
Clase base abstracta para clasificadores

Define la interfaz común de los modelos entrenables (NeuroView y baseline):
parámetros con nombre, forward diferenciable, predicción por lotes y
descripción serializable para los checkpoints.
"""

from abc import ABC, abstractmethod

import numpy as np

from neuroview.core import functional as F
from neuroview.core.tensor import DEFAULT_DTYPE, Tensor, no_grad
from neuroview.exceptions import DimensionError


class BaseClassifier(ABC):
    """
    Interfaz abstracta de los clasificadores de NeuroView

    Attributes:
        spec (ArchSpec): Arquitectura del backbone.
        seed (int): Semilla de inicialización.
        views (int): Número de vistas que consume el modelo.
        dtype: Tipo numérico de los parámetros.
    """

    family = None

    def __init__(self, spec, seed, views=1, dtype=DEFAULT_DTYPE):
        self.spec = spec
        self.seed = seed
        self.views = views
        self.dtype = np.dtype(dtype)

    @property
    def num_classes(self):
        return self.spec.num_classes

    @abstractmethod
    def parameters(self):
        """
        Retorna los parámetros entrenables en un orden estable

        Returns:
            list: Tensores con nombre único (backbone primero, cabeza al final)
        """
        pass

    @abstractmethod
    def forward(self, inputs):
        """
        Calcula los logits de un lote

        Args:
            inputs: Tensor [B, C, H, W], array [B, V, C, H, W] o lista de V tensores

        Returns:
            Tensor: Logits [B, num_classes]
        """
        pass

    @abstractmethod
    def describe(self):
        """
        Describe el modelo de forma serializable

        Returns:
            dict: Familia, arquitectura, configuración y semilla
        """
        pass

    def __call__(self, inputs):
        return self.forward(inputs)

    def named_parameters(self):
        return [(tensor.name, tensor) for tensor in self.parameters()]

    def state_dict(self):
        """Copia de los valores de todos los parámetros, indexada por nombre."""
        return {name: tensor.numpy() for name, tensor in self.named_parameters()}

    def load_state_dict(self, state):
        """
        Sustituye los valores de los parámetros.

        Args:
            state (dict): Nombre -> array con la forma del parámetro.

        Raises:
            KeyError: Si falta algún parámetro.
            ValueError: Si alguna forma no coincide.
        """
        for name, tensor in self.named_parameters():
            if name not in state:
                raise KeyError(f"Falta el parámetro '{name}'")
            tensor.assign(state[name])

    def zero_grad(self):
        for tensor in self.parameters():
            tensor.zero_grad()

    def split_views(self, inputs):
        """
        Normaliza la entrada a una lista con un Tensor [B, C, H, W] por vista.

        Raises:
            DimensionError: Si el número de vistas no coincide con el modelo.
        """
        if isinstance(inputs, (list, tuple)):
            views = [self._as_input(x) for x in inputs]
        else:
            data = inputs.data if isinstance(inputs, Tensor) else np.asarray(inputs)
            if data.ndim == 5:
                views = [self._as_input(data[:, v]) for v in range(data.shape[1])]
            elif data.ndim == 4:
                views = [self._as_input(inputs)]
            else:
                raise DimensionError(
                    f"Entrada de {data.ndim} dimensiones; se esperaba [B, C, H, W] o [B, V, C, H, W]"
                )

        if len(views) != self.views:
            raise DimensionError(
                f"El modelo espera {self.views} vistas y recibió {len(views)}"
            )
        return views

    def _as_input(self, x):
        if isinstance(x, Tensor):
            return x
        return Tensor(np.ascontiguousarray(x), dtype=self.dtype)

    def predict_proba(self, images, batch_size=256):
        """
        Probabilidades softmax por clase, calculadas por lotes y sin cinta.

        Args:
            images (np.ndarray): Imágenes [N, C, H, W] o [N, V, C, H, W].
            batch_size (int): Tamaño de lote de inferencia.

        Returns:
            np.ndarray: Probabilidades [N, num_classes]; cada fila suma 1.
        """
        images = np.asarray(images)
        chunks = []
        with no_grad():
            for start in range(0, len(images), batch_size):
                logits = self.forward(images[start:start + batch_size])
                chunks.append(F.softmax(logits.data))
        if not chunks:
            return np.zeros((0, self.num_classes), dtype=self.dtype)
        return np.concatenate(chunks, axis=0)

    def predict(self, images, batch_size=256):
        """Clase con mayor probabilidad para cada muestra."""
        return self.predict_proba(images, batch_size).argmax(axis=1)
