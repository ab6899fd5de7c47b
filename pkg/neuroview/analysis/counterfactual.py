"""
Evaluación contrafactual por canales de color.

Se anula un canal de color en todas las imágenes de un split (en el espacio
de píxeles [0, 1], tras la carga) y se mide la accuracy por clase de cada
modelo. Una clase cuyo acierto se hunde al quitar un canal depende del color
más que de la forma o la textura.
"""

import logging
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from neuroview.config import Config
from neuroview.training.metrics import evaluate
from neuroview.utils.manifest import dump_json
from neuroview.exceptions import ChannelError

logger = logging.getLogger(__name__)

CHANNEL_NAMES = ("none", "red", "green", "blue")
TABLE_COLUMNS = ["network", "class", *CHANNEL_NAMES]


class PerturbSpec(BaseModel):
    """
    Perturbación a aplicar.

    Attributes:
        channel (str): 'red', 'green', 'blue' o 'none' (identidad).
        split (str, optional): Split al que se aplica; None = cualquiera.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    channel: Literal["none", "red", "green", "blue"] = "none"
    split: Optional[Literal["train", "val"]] = None


def perturb(data, spec):
    """
    Anula un canal de color del dataset.

    Args:
        data (Dataset): Dataset de entrada.
        spec (PerturbSpec or str): Perturbación o nombre de canal.

    Returns:
        Dataset: Mismo dataset con el canal a cero; etiquetas, número de muestras
            y resto de canales intactos. Con 'none' (o un split distinto) se
            retorna el dataset sin cambios.

    Raises:
        ChannelError: Si el dataset no tiene ese canal (p. ej. escala de grises).
    """
    if isinstance(spec, str):
        spec = PerturbSpec(channel=spec)
    if spec.channel == "none":
        return data
    if spec.split is not None and spec.split != data.split:
        logger.debug(f"Perturbación de {spec.split} ignorada para el split {data.split}")
        return data

    if data.channels != len(Config.CHANNELS):
        raise ChannelError(
            f"No se puede anular el canal {spec.channel}: se esperaban {len(Config.CHANNELS)} canales RGB "
            f"y el dataset tiene {data.channels}"
        )
    index = Config.CHANNELS[spec.channel]

    images = data.images.copy()
    images[..., index, :, :] = 0.0
    return data.with_images(images)


class CounterfactualReport:
    """
    Accuracies por (red, clase, canal), en porcentaje y a precisión completa.

    Attributes:
        class_names (list of str): Clases del dataset.
        networks (list of str): Modelos evaluados, en orden.
        channels (list of str): Canales evaluados, en orden.
        per_class (dict): (network, channel) -> array [K] de accuracies en [0, 100].
        overall (dict): (network, channel) -> accuracy global en [0, 100].
    """

    def __init__(self, class_names, networks, channels, per_class, overall):
        self.class_names = list(class_names)
        self.networks = list(networks)
        self.channels = list(channels)
        self.per_class = per_class
        self.overall = overall

    def accuracy(self, network, class_name, channel):
        return float(self.per_class[(network, channel)][self.class_names.index(class_name)])

    def to_frame(self, decimals=None):
        """
        Tabla con columnas network, class, none, red, green, blue.

        Los canales no evaluados quedan vacíos. El redondeo solo se aplica aquí.

        Args:
            decimals (int, optional): Decimales de presentación.
        """
        rows = []
        for network in self.networks:
            for k, name in enumerate(self.class_names):
                row = {"network": network, "class": name}
                for channel in CHANNEL_NAMES:
                    values = self.per_class.get((network, channel))
                    row[channel] = float(values[k]) if values is not None else np.nan
                rows.append(row)
        frame = pd.DataFrame(rows, columns=TABLE_COLUMNS)
        if decimals is not None:
            frame[list(CHANNEL_NAMES)] = frame[list(CHANNEL_NAMES)].round(decimals)
        return frame

    def to_csv(self, path, decimals=2):
        self.to_frame(decimals).to_csv(path, index=False)
        logger.info(f"Tabla contrafactual escrita en {path}")
        return path

    def to_dict(self):
        return {
            "class_names": self.class_names,
            "networks": self.networks,
            "channels": self.channels,
            "per_class": {
                f"{network}/{channel}": values.tolist()
                for (network, channel), values in self.per_class.items()
            },
            "overall": {
                f"{network}/{channel}": value for (network, channel), value in self.overall.items()
            },
        }

    def to_json(self, path):
        dump_json(path, self.to_dict())
        return path


def dominant_channel(color):
    """Canal RGB de mayor intensidad de un color; los empates van al primero en orden RGB."""
    color = np.asarray(color, dtype=np.float64)
    if color.shape != (len(Config.CHANNELS),):
        raise ValueError(f"Se esperaba un color RGB, recibido {color.shape}")
    return CHANNEL_NAMES[1 + int(np.argmax(color))]


def dominant_channel_drops(report, network, palette=None):
    """
    Caída de accuracy de cada clase al anular el canal dominante de su color.

    Args:
        report (CounterfactualReport): Tabla con 'none' y los canales dominantes evaluados.
        network (str): Red a consultar.
        palette (sequence, optional): Color de cada clase; por defecto Config.DEFAULT_PALETTE.

    Returns:
        dict: Nombre de clase -> (canal dominante, puntos perdidos respecto a 'none').

    Raises:
        ValueError: Si la paleta no tiene un color por clase.
        KeyError: Si la tabla no incluye 'none' o alguno de los canales dominantes.
    """
    palette = list(palette if palette is not None else Config.DEFAULT_PALETTE)
    if len(palette) != len(report.class_names):
        raise ValueError(
            f"La paleta tiene {len(palette)} colores y la tabla {len(report.class_names)} clases"
        )

    drops = {}
    for name, color in zip(report.class_names, palette):
        channel = dominant_channel(color)
        drop = report.accuracy(network, name, "none") - report.accuracy(network, name, channel)
        drops[name] = (channel, drop)
    return drops


def counterfactual_table(models, data, channels=CHANNEL_NAMES):
    """
    Evalúa cada modelo con cada canal anulado.

    Args:
        models (list of tuple): Pares (nombre de red, modelo).
        data (Dataset): Split de evaluación.
        channels (sequence of str): Canales a evaluar; 'none' es la evaluación sin perturbar.

    Returns:
        CounterfactualReport: Una evaluación por (modelo, canal), en orden determinista.

    Raises:
        ChannelError: Si se pide un canal que el dataset no tiene.
    """
    channels = list(channels)
    perturbed = {channel: perturb(data, PerturbSpec(channel=channel)) for channel in channels}

    per_class, overall = {}, {}
    for network, model in models:
        for channel in channels:
            result = evaluate(model, perturbed[channel])
            per_class[(network, channel)] = result.per_class_accuracy * 100.0
            overall[(network, channel)] = result.accuracy * 100.0
            logger.info(f"{network} / canal {channel}: accuracy {result.accuracy:.4f}")

    return CounterfactualReport(data.class_names, [name for name, _ in models], channels,
                                per_class, overall)
