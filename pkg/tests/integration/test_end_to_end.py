"""
Tests de integración end-to-end para NeuroView.
"""

import math

import numpy as np
import pandas as pd
import pytest

from neuroview.analysis.concepts import ConceptLabelTable, concept_map
from neuroview.analysis.counterfactual import counterfactual_table, dominant_channel_drops
from neuroview.analysis.explain import top_units, view_mean, weight_report
from neuroview.analysis.render import load_report_csv, render
from neuroview.cli import main
from neuroview.config import NeuroViewConfig, TrainConfig
from neuroview.core.arch import get_preset, rebind
from neuroview.core.factory import build_model
from neuroview.data.colored_mnist import make_colored_mnist
from neuroview.data.dataset import Dataset
from neuroview.data.factory import load_split_pair, save_dataset
from neuroview.stores.checkpoint_store import load_checkpoint, save_checkpoint
from neuroview.training.metrics import evaluate
from neuroview.training.trainer import train

RGB_PALETTE = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]


class TestEndToEnd:
    """
    Tests de integración end-to-end del sistema completo.
    """

    @pytest.fixture
    def trained(self, small_spec, glyphs):
        """
        Entrena un modelo NeuroView de dos vistas sobre glifos.

        Returns:
            dict: Modelo, datos y resultado del entrenamiento.
        """
        train_data = glyphs(per_class=8, seed=1, views=2)
        val_data = glyphs(per_class=4, seed=2, views=2, split="val")
        model = build_model("neuroview", small_spec, NeuroViewConfig(views=2, reduce="mean"), seed=0)
        config = TrainConfig(epochs=4, batch_size=8, learning_rate=0.05, seed=0)
        result = train(model, train_data, config, val_data=val_data)
        return {"model": model, "train": train_data, "val": val_data, "result": result}

    def test_complete_pipeline(self, trained, tmp_path):
        """
        Verifica el pipeline completo: entrenar, guardar, recargar y explicar.
        """
        model = trained["model"]

        # Paso 1: Checkpoint con predicciones idénticas tras recargar
        save_checkpoint(model, tmp_path / "ckpt", metadata={"class_names": trained["train"].class_names})
        loaded = load_checkpoint(tmp_path / "ckpt")
        np.testing.assert_array_equal(loaded.predict_proba(trained["val"].images),
                                      model.predict_proba(trained["val"].images))
        assert evaluate(loaded, trained["val"]).accuracy == evaluate(model, trained["val"]).accuracy

        # Paso 2: Informe de pesos y partición exacta de la fila
        for class_k in range(model.num_classes):
            report = weight_report(loaded, class_k, trained["train"].class_names)
            row = loaded.head_weight.data[class_k].astype(np.float64)
            assert report.total() == math.fsum(row)

            path = render(report, tmp_path / f"report{class_k}.csv", "csv")
            assert load_report_csv(path, trained["train"].class_names) == report
            render(report, tmp_path / f"report{class_k}.svg", "svg")

        # Paso 3: Medias por vista y unidades influyentes
        means = view_mean(loaded, 0)
        assert [view for view, _ in means] == [0, 1]
        positive, negative = top_units(loaded, 0, k=3)
        assert all(u.weight > 0 for u in positive)
        assert all(u.weight < 0 for u in negative)

        # Paso 4: Mapa de conceptos
        labels = ConceptLabelTable({(0, 0): ("edge", "texture"), (1, 1): ("bar", "part")})
        cmap = concept_map(loaded, labels, 1, top_k=2)
        assert cmap.total() == weight_report(loaded, 1).total()
        assert "unlabeled" not in dict(cmap.positive + cmap.negative)

    def test_history_is_recorded(self, trained):
        """
        Verifica un registro por época con accuracy de validación.
        """
        history = trained["result"].history
        assert [record["epoch"] for record in history] == [0, 1, 2, 3]
        assert all(0.0 <= record["val_acc"] <= 1.0 for record in history)

    def test_cli_colored_pipeline(self, tmp_path, small_spec):
        """
        Verifica dataset make-colored-mnist, train sobre png-dir y perturb con la CLI.
        """
        rng = np.random.default_rng(0)
        source = tmp_path / "gray"
        for split, count in (("train", 40), ("val", 20)):
            save_dataset(Dataset(rng.uniform(size=(count, 1, 8, 8)), np.arange(count) % 10,
                                 [str(k) for k in range(10)], split=split), source, "idx")
        arch = tmp_path / "arch.json"
        small_spec.save(arch)

        colored = tmp_path / "colored"
        assert main(["dataset", "make-colored-mnist", "--data", str(source), "--out", str(colored)]) == 0
        train_data, val_data = load_split_pair(colored, "png-dir")
        assert train_data.channels == 3 and len(val_data) == 20

        run = tmp_path / "run"
        assert main(["train", "--arch", str(arch), "--data", str(colored), "--format", "png-dir",
                     "--epochs", "1", "--batch", "10", "--out", str(run)]) == 0

        out = tmp_path / "perturb"
        assert main(["perturb", "--ckpt", str(run / "checkpoint"), "--data", str(colored),
                     "--format", "png-dir", "--out", str(out)]) == 0
        frame = pd.read_csv(out / "counterfactual.csv")
        assert len(frame) == 10
        assert frame[["none", "red", "green", "blue"]].notna().all().all()

    @pytest.mark.slow
    def test_color_bias_is_detected(self, small_spec, glyphs):
        """
        Verifica que un modelo entrenado con color perfectamente correlacionado pierda
        accuracy al anular el canal dominante de cada clase y con colores no correlacionados.
        """
        spec = rebind(small_spec, input_shape=(3, 8, 8))
        train_data = make_colored_mnist(glyphs(per_class=30, seed=1), 1.0, palette=RGB_PALETTE, seed=0)
        val_data = make_colored_mnist(glyphs(per_class=10, seed=2, split="val"), 1.0,
                                      palette=RGB_PALETTE, seed=1)

        model = build_model("neuroview", spec, NeuroViewConfig(reduce="mean"), seed=0)
        train(model, train_data, TrainConfig(epochs=6, batch_size=10, learning_rate=0.05, seed=0))

        report = counterfactual_table([("neuroview", model)], val_data)
        drops = dominant_channel_drops(report, "neuroview", RGB_PALETTE)
        assert np.mean([drop for _, drop in drops.values()]) > 0.0

        uncorrelated = make_colored_mnist(glyphs(per_class=10, seed=2, split="val"), 0.0,
                                          palette=RGB_PALETTE, seed=1)
        assert evaluate(model, uncorrelated).accuracy < evaluate(model, val_data).accuracy

    @pytest.mark.slow
    def test_mnist_parity(self, mnist_dir):
        """
        Verifica que NeuroView y el baseline alcancen al menos 0.95 en MNIST con una
        diferencia de accuracy no mayor que 0.02.
        """
        train_data, val_data = load_split_pair(mnist_dir, "idx")
        spec = get_preset("vgg-mini", train_data.input_shape, train_data.num_classes)
        config = TrainConfig(epochs=5, batch_size=64, learning_rate=0.05, seed=0)

        accuracies = {}
        for family in ("neuroview", "baseline"):
            neuroview_config = NeuroViewConfig(reduce="mean") if family == "neuroview" else None
            model = build_model(family, spec, neuroview_config, seed=0)
            train(model, train_data, config)
            accuracies[family] = evaluate(model, val_data).accuracy

        assert min(accuracies.values()) >= 0.95
        assert abs(accuracies["neuroview"] - accuracies["baseline"]) <= 0.02
