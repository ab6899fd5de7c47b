"""
Informes de explicabilidad a partir de la cabeza lineal global.

Todo se lee de la matriz W del modelo: la fila k contiene la contribución con
signo de cada unidad a la clase k. Los informes son funciones puras del
checkpoint y conservan el orden de concatenación de las unidades.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
import pandas as pd
from sklearn.metrics.pairwise import cosine_similarity

from neuroview.core.neuroview import UnitWeight
from neuroview.exceptions import DimensionError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["class", "layer", "view", "channel", "weight"]


class LayerSummary(NamedTuple):
    """Estadísticos de los pesos de una capa de una vista."""

    view: int
    layer: int
    count: int
    min: float
    max: float
    mean: float
    positive_share: float


def summarize(view, layer, weights):
    """
    Resume un bloque de pesos.

    positive_share es la masa positiva entre la masa absoluta total
    (0 si todos los pesos son cero).
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.size == 0:
        return LayerSummary(view, layer, 0, 0.0, 0.0, 0.0, 0.0)
    absolute = math.fsum(np.abs(weights))
    positive = math.fsum(weights[weights > 0])
    return LayerSummary(
        view=view,
        layer=layer,
        count=int(weights.size),
        min=float(weights.min()),
        max=float(weights.max()),
        mean=math.fsum(weights) / weights.size,
        positive_share=positive / absolute if absolute > 0 else 0.0,
    )


class ClassWeightReport:
    """
    Pesos de una clase particionados por vista y capa.

    Attributes:
        class_id (int): Índice de la clase.
        class_name (str): Nombre de la clase.
        entries (list of UnitWeight): U_total entradas en orden de concatenación.
        summaries (list of LayerSummary): Un resumen por (vista, capa).
    """

    def __init__(self, class_id, class_name, entries):
        self.class_id = int(class_id)
        self.class_name = str(class_name)
        self.entries = [UnitWeight(*entry) for entry in entries]
        self.summaries = self._summaries()

    def _summaries(self):
        blocks = {}
        for entry in self.entries:
            blocks.setdefault((entry.view, entry.layer), []).append(entry.weight)
        return [summarize(view, layer, weights) for (view, layer), weights in blocks.items()]

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ClassWeightReport):
            return NotImplemented
        return (self.class_id == other.class_id and self.class_name == other.class_name
                and self.entries == other.entries)

    def weights(self):
        """Pesos en orden de concatenación (float32, igual a la fila de W)."""
        return np.array([entry.weight for entry in self.entries], dtype=np.float32)

    def layout(self):
        return [(entry.layer, entry.view, entry.channel) for entry in self.entries]

    def total(self):
        return math.fsum(entry.weight for entry in self.entries)

    def to_frame(self):
        """DataFrame con columnas class, layer, view, channel, weight."""
        return pd.DataFrame(
            [(self.class_id, *entry) for entry in self.entries],
            columns=REPORT_COLUMNS,
        )

    def summary_frame(self):
        return pd.DataFrame([summary._asdict() for summary in self.summaries])

    def to_dict(self):
        return {
            "class": self.class_id,
            "class_name": self.class_name,
            "entries": [entry._asdict() for entry in self.entries],
            "summaries": [summary._asdict() for summary in self.summaries],
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(payload["class"], payload["class_name"],
                   [UnitWeight(**entry) for entry in payload["entries"]])


def _class_name(model, class_k, class_names):
    if class_names is not None:
        if len(class_names) != model.num_classes:
            raise DimensionError(
                f"{len(class_names)} nombres de clase para un modelo de {model.num_classes} clases"
            )
        return class_names[class_k]
    return str(class_k)


def weight_report(model, class_k, class_names=None):
    """
    Informe de pesos de una clase.

    Args:
        model (NeuroViewModel): Modelo (entrenado o no).
        class_k (int): Clase a explicar.
        class_names (list, optional): Nombres de clase; por defecto el índice.

    Returns:
        ClassWeightReport: Entradas y resúmenes por capa.

    Raises:
        LabelIndexError: Si la clase está fuera de rango.
    """
    entries = model.weight_row(class_k)
    return ClassWeightReport(class_k, _class_name(model, class_k, class_names), entries)


def view_mean(model, class_k):
    """
    Media de los pesos de cada vista: suma de los pesos de sus unidades / unidades por vista.

    Returns:
        list of tuple: (view_index, mean_weight), una entrada por vista.
    """
    row = model.head_row(class_k).astype(np.float64)
    units = model.units_per_view
    return [
        (view, math.fsum(row[view * units:(view + 1) * units]) / units)
        for view in range(model.config.views)
    ]


def top_units(model, class_k, k=5):
    """
    Unidades más influyentes de una clase.

    Args:
        model (NeuroViewModel): Modelo.
        class_k (int): Clase.
        k (int): Número de unidades por dirección.

    Returns:
        tuple: (positivas, negativas), listas de UnitWeight; las positivas de mayor
            a menor peso y las negativas de más negativa a menos. Los empates se
            resuelven por posición en la concatenación.
    """
    entries = model.weight_row(class_k)
    order = range(len(entries))
    positive = sorted((i for i in order if entries[i].weight > 0),
                      key=lambda i: (-entries[i].weight, i))
    negative = sorted((i for i in order if entries[i].weight < 0),
                      key=lambda i: (entries[i].weight, i))
    return [entries[i] for i in positive[:k]], [entries[i] for i in negative[:k]]


def class_similarity(model):
    """
    Similitud coseno entre las filas de W de todas las clases.

    Returns:
        np.ndarray: Matriz [K, K] simétrica con unos en la diagonal (salvo filas nulas).
    """
    weights = model.head_weight.numpy().astype(np.float64)
    return cosine_similarity(weights)


def compare_reports(a, b):
    """
    Compara dos informes con la misma disposición de unidades.

    Útil para contrastar el mismo ArchSpec entrenado sobre datasets distintos.

    Args:
        a (ClassWeightReport): Primer informe.
        b (ClassWeightReport): Segundo informe.

    Returns:
        tuple: (entradas, capas). `entradas` tiene columnas layer, view, channel,
            weight_a, weight_b, delta; `capas` agrega por (view, layer) las sumas y la delta.

    Raises:
        DimensionError: Si la disposición de unidades difiere.
    """
    if a.layout() != b.layout():
        raise DimensionError("Los informes no comparten la misma disposición de unidades")

    frame = a.to_frame().drop(columns=["class"]).rename(columns={"weight": "weight_a"})
    frame["weight_b"] = b.weights().astype(np.float64)
    frame["weight_a"] = frame["weight_a"].astype(np.float64)
    frame["delta"] = frame["weight_b"] - frame["weight_a"]

    layers = (
        frame.groupby(["view", "layer"], sort=False)[["weight_a", "weight_b", "delta"]]
        .sum()
        .reset_index()
    )
    return frame, layers
