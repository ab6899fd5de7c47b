"""
Mapeo concepto-clase a partir de etiquetas de unidades.

Una tabla de etiquetas asigna a cada unidad (capa, canal) un concepto y una
categoría, obtenidos externamente (p. ej. con Network Dissection). El peso de
cada concepto para una clase es la suma con signo de los pesos de sus
unidades; las unidades sin etiqueta se agregan bajo 'unlabeled', de modo que
la suma sobre conceptos reproduce la suma de la fila completa.
"""

import json
import logging
import math
from pathlib import Path
from typing import NamedTuple

import pandas as pd

from neuroview.config import Config
from neuroview.core.arch import unit_layout
from neuroview.exceptions import LabelValidationError

logger = logging.getLogger(__name__)

LABEL_COLUMNS = ["layer", "channel", "concept", "category"]


class ConceptLabel(NamedTuple):
    concept: str
    category: str


class ConceptLabelTable:
    """
    Etiquetas unidad -> concepto, compartidas por todas las vistas.

    Attributes:
        labels (dict): (layer, channel) -> ConceptLabel.
    """

    def __init__(self, labels=None):
        self.labels = {}
        for (layer, channel), label in (labels or {}).items():
            self.add(layer, channel, *label)

    def add(self, layer, channel, concept, category):
        """
        Etiqueta una unidad.

        Raises:
            LabelValidationError: Si la unidad ya estaba etiquetada o la categoría no existe.
        """
        key = (int(layer), int(channel))
        if key in self.labels:
            raise LabelValidationError(f"La unidad (capa {key[0]}, canal {key[1]}) está etiquetada dos veces")
        if category not in Config.CONCEPT_CATEGORIES:
            raise LabelValidationError(
                f"Categoría '{category}' desconocida. Opciones válidas: {', '.join(Config.CONCEPT_CATEGORIES)}"
            )
        if not concept or concept == Config.UNLABELED_CONCEPT:
            raise LabelValidationError(f"Nombre de concepto inválido para la unidad {key}: '{concept}'")
        self.labels[key] = ConceptLabel(str(concept), str(category))

    def __len__(self):
        return len(self.labels)

    def concept_of(self, layer, channel):
        label = self.labels.get((layer, channel))
        return label.concept if label else Config.UNLABELED_CONCEPT

    def category_of(self, layer, channel):
        label = self.labels.get((layer, channel))
        return label.category if label else Config.UNLABELED_CONCEPT

    def validate(self, spec):
        """
        Comprueba que todas las unidades etiquetadas existan en la arquitectura.

        Raises:
            LabelValidationError: Si alguna etiqueta referencia una unidad inexistente.
        """
        channels = dict(unit_layout(spec))
        for layer, channel in self.labels:
            if layer not in channels or not 0 <= channel < channels[layer]:
                raise LabelValidationError(
                    f"La etiqueta de la unidad (capa {layer}, canal {channel}) no existe en '{spec.name}'"
                )

    @classmethod
    def from_frame(cls, frame, source="tabla"):
        missing = [column for column in LABEL_COLUMNS if column not in frame.columns]
        if missing:
            raise LabelValidationError(f"A {source} le faltan las columnas {missing}")
        table = cls()
        for row in frame.itertuples(index=False):
            table.add(row.layer, row.channel, row.concept, row.category)
        return table

    @classmethod
    def from_csv(cls, path):
        """
        Carga una tabla CSV con cabecera layer,channel,concept,category.

        Raises:
            LabelValidationError: Si faltan columnas, hay duplicados o categorías desconocidas.
        """
        try:
            frame = pd.read_csv(path, dtype={"concept": str, "category": str})
        except pd.errors.EmptyDataError:
            return cls()
        return cls.from_frame(frame, source=str(path))

    def to_frame(self):
        rows = [(layer, channel, *label) for (layer, channel), label in sorted(self.labels.items())]
        return pd.DataFrame(rows, columns=LABEL_COLUMNS)

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def rank_concepts(sums, top_k):
    """
    Conceptos con mayor peso positivo y negativo.

    Se ordenan por valor con signo y los empates por nombre ascendente;
    'unlabeled' no compite en los rankings.

    Returns:
        tuple: (positivos, negativos), listas de pares (concepto, suma).
    """
    named = [(c, s) for c, s in sums.items() if c != Config.UNLABELED_CONCEPT]
    positive = sorted((item for item in named if item[1] > 0), key=lambda item: (-item[1], item[0]))
    negative = sorted((item for item in named if item[1] < 0), key=lambda item: (item[1], item[0]))
    return positive[:top_k], negative[:top_k]


class ConceptMap:
    """
    Distribución de pesos de una clase sobre conceptos.

    Attributes:
        class_id (int): Índice de la clase.
        class_name (str): Nombre de la clase.
        sums (dict): Concepto -> suma con signo de los pesos de sus unidades.
        categories (dict): Concepto -> categoría.
        top_k (int): Longitud de los rankings.
        positive (list): Los top_k conceptos positivos.
        negative (list): Los top_k conceptos negativos.
        row_total (float): Suma exacta de la fila completa, acumulada una sola vez.
    """

    def __init__(self, class_id, class_name, sums, categories, top_k, row_total=None):
        self.class_id = int(class_id)
        self.class_name = str(class_name)
        self.sums = dict(sorted(sums.items()))
        self.categories = dict(sorted(categories.items()))
        self.top_k = int(top_k)
        self.positive, self.negative = rank_concepts(self.sums, self.top_k)
        self.row_total = float(row_total) if row_total is not None else math.fsum(self.sums.values())

    def total(self):
        return self.row_total

    def percentages(self):
        """
        Peso relativo de cada concepto, |suma| / Σ|sumas| (en %).

        Es una vista derivada para presentación; las sumas con signo son la fuente.
        """
        absolute = math.fsum(abs(s) for s in self.sums.values())
        if absolute == 0:
            return {concept: 0.0 for concept in self.sums}
        return {concept: 100.0 * abs(s) / absolute for concept, s in self.sums.items()}

    def category_sums(self):
        totals = {}
        for concept, value in self.sums.items():
            totals.setdefault(self.categories.get(concept, Config.UNLABELED_CONCEPT), []).append(value)
        return {category: math.fsum(values) for category, values in sorted(totals.items())}

    def to_frame(self):
        percentages = self.percentages()
        return pd.DataFrame(
            [(self.class_id, concept, self.categories.get(concept, Config.UNLABELED_CONCEPT),
              value, percentages[concept]) for concept, value in self.sums.items()],
            columns=["class", "concept", "category", "weight", "percentage"],
        )

    def to_dict(self):
        return {
            "class": self.class_id,
            "class_name": self.class_name,
            "top_k": self.top_k,
            "sums": self.sums,
            "total": self.row_total,
            "categories": self.categories,
            "positive": [list(item) for item in self.positive],
            "negative": [list(item) for item in self.negative],
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(payload["class"], payload["class_name"], payload["sums"],
                   payload.get("categories", {}), payload["top_k"], payload.get("total"))

    def __eq__(self, other):
        if not isinstance(other, ConceptMap):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def concept_map(model, labels, class_k, top_k=5, class_names=None):
    """
    Suma los pesos de la clase k por concepto.

    Args:
        model (NeuroViewModel): Modelo.
        labels (ConceptLabelTable): Etiquetas de unidades.
        class_k (int): Clase.
        top_k (int): Longitud de los rankings positivo y negativo.
        class_names (list, optional): Nombres de clase.

    Returns:
        ConceptMap: Sumas exactamente redondeadas por concepto.

    Raises:
        LabelValidationError: Si alguna etiqueta referencia una unidad inexistente.
        LabelIndexError: Si la clase está fuera de rango.
    """
    labels = labels or ConceptLabelTable()
    labels.validate(model.spec)

    entries = model.weight_row(class_k)
    grouped, categories = {}, {}
    for entry in entries:
        concept = labels.concept_of(entry.layer, entry.channel)
        grouped.setdefault(concept, []).append(entry.weight)
        categories[concept] = labels.category_of(entry.layer, entry.channel)

    sums = {concept: math.fsum(values) for concept, values in grouped.items()}
    name = class_names[class_k] if class_names is not None else str(class_k)

    logger.debug(f"Mapa de conceptos de la clase {class_k}: {len(sums)} conceptos")
    return ConceptMap(class_k, name, sums, categories, top_k,
                      row_total=math.fsum(entry.weight for entry in entries))


def load_concept_map_json(path):
    """Recarga un ConceptMap escrito en JSON; los rankings se recalculan."""
    return ConceptMap.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
