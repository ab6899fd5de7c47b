"""
Emisión de los artefactos de explicabilidad en CSV, JSON y SVG.

CSV y JSON son representaciones sin pérdida de los informes; los SVG son
figuras autocontenidas generadas con matplotlib (backend Agg), sin marcas de
tiempo y con identificadores fijos para que sean reproducibles byte a byte.
"""

import json
import logging
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd
from matplotlib import colormaps
from matplotlib.figure import Figure
from matplotlib.patches import Patch

from neuroview.analysis.concepts import ConceptMap
from neuroview.analysis.explain import REPORT_COLUMNS, ClassWeightReport
from neuroview.core.neuroview import UnitWeight
from neuroview.exceptions import DimensionError
from neuroview.utils.manifest import dump_json

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "svg")

SVG_RC = {"svg.hashsalt": "neuroview", "svg.fonttype": "none"}
POSITIVE_COLOR = "#2ca02c"
NEGATIVE_COLOR = "#d62728"


def _check_format(fmt):
    if fmt not in FORMATS:
        raise ValueError(f"Formato inválido: '{fmt}'. Opciones válidas: {', '.join(FORMATS)}")


def _save_svg(figure, path):
    with matplotlib.rc_context(SVG_RC):
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.info(f"Figura SVG escrita en {path}")


def _prepare(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def report_svg(report, path):
    """Barras de pesos por unidad (eje x: índice de unidad), coloreadas por capa."""
    weights = report.weights()
    layers = np.array([entry.layer for entry in report.entries])
    palette = colormaps["tab10"]

    figure = Figure(figsize=(max(6.0, min(24.0, len(weights) / 12.0)), 4.0))
    axes = figure.add_subplot()
    axes.bar(np.arange(len(weights)), weights, width=1.0,
             color=[palette(layer % 10) for layer in layers], linewidth=0)
    axes.axhline(0.0, color="black", linewidth=0.5)
    axes.set_xlabel("Unidad")
    axes.set_ylabel("Peso")
    axes.set_title(f"Pesos de la clase {report.class_name}")
    axes.legend(handles=[Patch(color=palette(layer % 10), label=f"Capa {layer}")
                         for layer in sorted(set(layers.tolist()))],
                loc="upper left", fontsize="small")
    figure.tight_layout()
    _save_svg(figure, path)


def concept_map_svg(cmap, path):
    """Barras horizontales de los top-k conceptos positivos y negativos con su porcentaje."""
    percentages = cmap.percentages()
    items = list(cmap.positive) + list(reversed(cmap.negative))

    figure = Figure(figsize=(6.0, max(2.0, 0.4 * len(items) + 1.0)))
    axes = figure.add_subplot()
    positions = np.arange(len(items))[::-1]
    axes.barh(positions, [value for _, value in items],
              color=[POSITIVE_COLOR if value > 0 else NEGATIVE_COLOR for _, value in items])
    axes.set_yticks(positions)
    axes.set_yticklabels([f"{name} ({percentages[name]:.1f}%)" for name, _ in items])
    axes.axvline(0.0, color="black", linewidth=0.5)
    axes.set_xlabel("Suma de pesos")
    axes.set_title(f"Conceptos de la clase {cmap.class_name} (+/-)")
    figure.tight_layout()
    _save_svg(figure, path)


def view_means_svg(view_means, path, class_name=""):
    """Barras de la media de pesos de cada vista."""
    views = [view for view, _ in view_means]
    means = [mean for _, mean in view_means]

    figure = Figure(figsize=(max(4.0, 0.5 * len(views) + 2.0), 3.5))
    axes = figure.add_subplot()
    axes.bar(views, means, color=[POSITIVE_COLOR if m >= 0 else NEGATIVE_COLOR for m in means])
    axes.axhline(0.0, color="black", linewidth=0.5)
    axes.set_xticks(views)
    axes.set_xlabel("Vista")
    axes.set_ylabel("Peso medio")
    axes.set_title(f"Media de pesos por vista {class_name}".strip())
    figure.tight_layout()
    _save_svg(figure, path)


def write_report(report, path, fmt="csv"):
    """
    Escribe un ClassWeightReport.

    Args:
        report (ClassWeightReport): Informe.
        path (str or Path): Fichero de destino.
        fmt (str): 'csv' (columnas class,layer,view,channel,weight), 'json' o 'svg'.
    """
    _check_format(fmt)
    path = _prepare(path)
    if fmt == "csv":
        report.to_frame().to_csv(path, index=False)
    elif fmt == "json":
        dump_json(path, report.to_dict())
    else:
        report_svg(report, path)
    return path


def write_concept_map(cmap, path, fmt="json"):
    """Escribe un ConceptMap (CSV con porcentajes derivados, JSON sin pérdida o SVG)."""
    _check_format(fmt)
    path = _prepare(path)
    if fmt == "csv":
        cmap.to_frame().to_csv(path, index=False)
    elif fmt == "json":
        dump_json(path, cmap.to_dict())
    else:
        concept_map_svg(cmap, path)
    return path


def write_view_means(view_means, path, fmt="csv", class_id=0, class_name=None):
    """Escribe las medias por vista de una clase."""
    _check_format(fmt)
    path = _prepare(path)
    class_name = class_name if class_name is not None else str(class_id)
    if fmt == "csv":
        pd.DataFrame(
            [(class_id, view, mean) for view, mean in view_means],
            columns=["class", "view", "mean_weight"],
        ).to_csv(path, index=False)
    elif fmt == "json":
        dump_json(path, {
            "class": class_id,
            "class_name": class_name,
            "view_means": [{"view": view, "mean_weight": mean} for view, mean in view_means],
        })
    else:
        view_means_svg(view_means, path, class_name)
    return path


def render(artifact, path, fmt, **kwargs):
    """
    Escribe cualquier artefacto de explicabilidad en el formato pedido.

    Args:
        artifact: ClassWeightReport, ConceptMap o lista de (view, mean_weight).
        path (str or Path): Fichero de destino.
        fmt (str): 'csv', 'json' o 'svg'.

    Returns:
        Path: Fichero escrito.
    """
    if isinstance(artifact, ClassWeightReport):
        return write_report(artifact, path, fmt)
    if isinstance(artifact, ConceptMap):
        return write_concept_map(artifact, path, fmt)
    return write_view_means(artifact, path, fmt, **kwargs)


def load_report_csv(path, class_names=None):
    """
    Recarga un informe escrito en CSV.

    Args:
        path (str or Path): Fichero CSV.
        class_names (list, optional): Nombres de clase; por defecto el índice.

    Returns:
        ClassWeightReport: Informe con las mismas entradas, bit a bit.

    Raises:
        DimensionError: Si faltan columnas o el fichero mezcla clases.
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != REPORT_COLUMNS:
        raise DimensionError(f"{path}: columnas {list(frame.columns)}, se esperaban {REPORT_COLUMNS}")
    classes = frame["class"].unique()
    if len(classes) != 1:
        raise DimensionError(f"{path} contiene {len(classes)} clases; se esperaba una")

    class_id = int(classes[0])
    entries = [
        UnitWeight(int(row.layer), int(row.view), int(row.channel), float(row.weight))
        for row in frame.itertuples(index=False)
    ]
    name = class_names[class_id] if class_names is not None else str(class_id)
    return ClassWeightReport(class_id, name, entries)


def load_report_json(path):
    return ClassWeightReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
