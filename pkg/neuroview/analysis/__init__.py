"""
Explicabilidad y análisis contrafactual.

Proporciona:
- weight_report / view_mean / top_units: Lectura de la fila de pesos de una clase
- concept_map: Agrupación de pesos por conceptos etiquetados externamente
- counterfactual_table: Accuracy por clase con canales de color anulados
- render: Emisión de los artefactos en CSV, JSON o SVG
"""

from neuroview.analysis.concepts import ConceptLabelTable, ConceptMap, concept_map
from neuroview.analysis.counterfactual import (
    CounterfactualReport,
    PerturbSpec,
    counterfactual_table,
    perturb,
)
from neuroview.analysis.explain import (
    ClassWeightReport,
    class_similarity,
    compare_reports,
    top_units,
    view_mean,
    weight_report,
)
from neuroview.analysis.render import load_report_csv, load_report_json, render

__all__ = [
    "ConceptLabelTable",
    "ConceptMap",
    "concept_map",
    "CounterfactualReport",
    "PerturbSpec",
    "counterfactual_table",
    "perturb",
    "ClassWeightReport",
    "class_similarity",
    "compare_reports",
    "top_units",
    "view_mean",
    "weight_report",
    "load_report_csv",
    "load_report_json",
    "render",
]
